#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dtn/blocks.hpp"
#include "dtn/config.hpp"
#include "dtn/corpus.hpp"
#include "dtn/draws.hpp"
#include "dtn/genmodel.hpp"
#include "dtn/gsdmm.hpp"
#include "dtn/network.hpp"
#include "dtn/random.hpp"
#include "dtn/window_counts.hpp"

namespace dtn {

struct AcceptanceStats {
  long proposed = 0;
  long accepted = 0;

  void record(bool ok) {
    ++proposed;
    accepted += ok;
  }
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
  AcceptanceStats& operator+=(const AcceptanceStats& o) {
    proposed += o.proposed;
    accepted += o.accepted;
    return *this;
  }
  AcceptanceStats& operator-=(const AcceptanceStats& o) {
    proposed -= o.proposed;
    accepted -= o.accepted;
    return *this;
  }
};

struct AcceptanceTable {
  AcceptanceStats pi, rho, E, psi;
  std::array<AcceptanceStats, kNumCovariates> theta;

  AcceptanceTable& operator+=(const AcceptanceTable& o) {
    pi += o.pi;
    rho += o.rho;
    E += o.E;
    psi += o.psi;
    for (std::size_t p = 0; p < theta.size(); ++p) theta[p] += o.theta[p];
    return *this;
  }
  AcceptanceTable& operator-=(const AcceptanceTable& o) {
    pi -= o.pi;
    rho -= o.rho;
    E -= o.E;
    psi -= o.psi;
    for (std::size_t p = 0; p < theta.size(); ++p) theta[p] -= o.theta[p];
    return *this;
  }
};

struct IterationLog {
  int iteration = 0;
  AcceptanceTable acceptance;  // this iteration only
  double post_loglik = 0.0;
  double link_loglik = 0.0;
  int nonempty_blocks = 0;
  long xi_fallbacks = 0;  // cumulative count of all-zero rate vectors
};

struct SamplerState {
  std::vector<int> z;  // per post, -1 while unassigned
  std::vector<int> b;
  std::vector<double> pi;  // I x K
  std::vector<double> rho;
  std::vector<std::uint8_t> E;  // K x T
  std::vector<double> psi;
  Theta theta{};
};

// Metropolis-within-Gibbs sampler for one chain. The corpus and network
// design are shared read-only; everything mutable lives here.
class Sampler {
 public:
  Sampler(const Corpus& corpus, const NetworkDesign& design, const ModelConfig& cfg, std::uint64_t stream = 0)
      : c_(corpus), net_(design), cfg_(cfg), cat_(cfg.K), K_(cfg.K), I_(corpus.num_blogs()), T_(corpus.horizon()),
        rng_(make_rng(cfg.seed, stream)), counts_(cfg.K, corpus.vocab_size(), cfg.ell),
        scorer_({cfg.alpha, cfg.beta}, cfg.K, corpus.vocab_size(), corpus.total_tokens() + 1) {
    require_valid(cfg);
    if (design.num_nodes() != I_ || design.horizon() != T_)
      throw ConfigError("link data covers " + std::to_string(design.num_nodes()) + " blogs x " +
                        std::to_string(design.horizon()) + " days but the corpus has " + std::to_string(I_) + " x " +
                        std::to_string(T_));
    s_.z.assign(static_cast<std::size_t>(c_.num_posts()), -1);
    s_.b.assign(static_cast<std::size_t>(I_), cat_.all_topics_block());
    s_.pi.assign(static_cast<std::size_t>(I_) * K_, 1.0 / K_);
    s_.rho.assign(static_cast<std::size_t>(I_), 1.0);
    s_.E.assign(static_cast<std::size_t>(K_) * T_, 0);
    s_.psi.assign(static_cast<std::size_t>(K_), 0.0);
    s_.theta.fill(0.0);
    D_.assign(static_cast<std::size_t>(T_) * I_ * K_, 0);
    blog_topic_.assign(static_cast<std::size_t>(I_) * K_, 0);
    nonzero_.resize(static_cast<std::size_t>(I_));
    events_.assign(static_cast<std::size_t>(K_), 0);
    block_size_.assign(static_cast<std::size_t>(cat_.size()), 0);
    xi_.resize(static_cast<std::size_t>(K_));
    prob_.resize(static_cast<std::size_t>(K_));
  }

  const SamplerState& state() const noexcept { return s_; }
  SamplerState& mutable_state() noexcept { return s_; }
  const BlockCatalog& catalog() const noexcept { return cat_; }
  const WindowCounts& window() const noexcept { return counts_; }
  const AcceptanceTable& acceptance() const noexcept { return acc_; }
  long xi_fallbacks() const noexcept { return xi_fallbacks_; }
  Rng& rng() noexcept { return rng_; }

  std::span<const double> pi_row(int i) const {
    return {s_.pi.data() + static_cast<std::size_t>(i) * K_, static_cast<std::size_t>(K_)};
  }
  bool event(int k, int t) const { return s_.E[static_cast<std::size_t>(k) * T_ + (t - 1)] != 0; }
  int post_count(int t, int i, int k) const { return D_[cell(t, i, k)]; }

  // Start: topics from one pass with uniform xi, blocks uniform over
  // candidates, pi at its conditional mean, rho at the mean daily post count,
  // theta = 0, no events, psi from its generative prior.
  void initialize() {
    std::fill(s_.z.begin(), s_.z.end(), -1);
    counts_.reset();
    uniform_xi_ = true;
    for (int t = 1; t <= T_; ++t) {
      counts_.advance(c_, s_.z, t);
      for (int d : c_.posts_on_day(t)) assign_topic(d);
    }
    uniform_xi_ = false;
    rebuild_post_counts();

    for (int i = 0; i < I_; ++i) {
      const auto cand = block_candidates(i);
      std::uniform_int_distribution<std::size_t> pick(0, cand.size() - 1);
      s_.b[static_cast<std::size_t>(i)] = cand[pick(rng_)];
      // pi at its conditional mean given the block and the initial topic counts
      const auto alpha = cat_.dirichlet_params(s_.b[static_cast<std::size_t>(i)], cfg_.P);
      double total = 0.0;
      for (int k = 0; k < K_; ++k) total += alpha[static_cast<std::size_t>(k)] + blog_topic_[static_cast<std::size_t>(i) * K_ + k];
      for (int k = 0; k < K_; ++k)
        s_.pi[static_cast<std::size_t>(i) * K_ + k] =
            (alpha[static_cast<std::size_t>(k)] + blog_topic_[static_cast<std::size_t>(i) * K_ + k]) / total;
      const int Di = c_.blog_post_count(i);
      s_.rho[static_cast<std::size_t>(i)] = Di > 0 ? static_cast<double>(Di) / T_ : 0.5 / T_;
    }
    s_.theta.fill(0.0);
    std::fill(s_.E.begin(), s_.E.end(), 0);
    std::fill(events_.begin(), events_.end(), 0);
    for (double& p : s_.psi) p = sample_psi(cfg_.a_psi, cfg_.b_psi, rng_);
    recount_blocks();
  }

  // ---- stage 1: topics ----

  // Fills xi_ for blog i on day t; uniform during initialization.
  void compute_xi(int i, int t) {
    if (uniform_xi_) {
      std::fill(xi_.begin(), xi_.end(), 1.0 / K_);
      return;
    }
    const double rho = s_.rho[static_cast<std::size_t>(i)];
    const auto pi = pi_row(i);
    for (int k = 0; k < K_; ++k)
      prob_[static_cast<std::size_t>(k)] =
          post_rate(rho, pi[static_cast<std::size_t>(k)], event(k, t), s_.psi[static_cast<std::size_t>(k)]);
    if (!augmentation_weights(prob_, xi_)) ++xi_fallbacks_;
  }

  // Draws z_d given the window counts (which must exclude d) and adds d back.
  int assign_topic(int d) {
    const Post& p = c_.post(d);
    compute_xi(p.blog, p.day);
    scorer_(p, counts_, xi_, prob_);
    const int k = draw_categorical(rng_, prob_);
    s_.z[static_cast<std::size_t>(d)] = k;
    counts_.add(p, k);
    return k;
  }

  void sweep_topics(int t, int sweeps) {
    if (counts_.cursor() > t) counts_.reset();
    if (counts_.cursor() < t) counts_.advance(c_, s_.z, t);
    for (int s = 0; s < sweeps; ++s)
      for (int d : c_.posts_on_day(t)) {
        const int old = s_.z[static_cast<std::size_t>(d)];
        if (old >= 0) counts_.remove(c_.post(d), old);
        assign_topic(d);
      }
  }

  void topic_stage() {
    counts_.reset();
    for (int t = 1; t <= T_; ++t) sweep_topics(t, cfg_.sweeps);
    if (cfg_.audit) audit_window(counts_, c_, s_.z);
  }

  // ---- stage 2: blog and event parameters ----

  void rebuild_post_counts() {
    std::fill(D_.begin(), D_.end(), 0);
    std::fill(blog_topic_.begin(), blog_topic_.end(), 0);
    for (int d = 0; d < c_.num_posts(); ++d) {
      const int k = s_.z[static_cast<std::size_t>(d)];
      if (k < 0) continue;
      const Post& p = c_.post(d);
      ++D_[cell(p.day, p.blog, k)];
      ++blog_topic_[static_cast<std::size_t>(p.blog) * K_ + k];
    }
    log_factorials_ = 0.0;
    for (int i = 0; i < I_; ++i) nonzero_[static_cast<std::size_t>(i)].clear();
    for (int t = 1; t <= T_; ++t)
      for (int i = 0; i < I_; ++i)
        for (int k = 0; k < K_; ++k)
          if (const int n = D_[cell(t, i, k)]) {
            nonzero_[static_cast<std::size_t>(i)].push_back({t, k, n});
            log_factorials_ += std::lgamma(n + 1.0);
          }
  }

  // Poisson log-likelihood of blog i's daily topic counts, without the
  // log D! constants.
  double blog_loglik(int i, std::span<const double> pi, double rho) const {
    double ll = 0.0;
    for (const auto& e : nonzero_[static_cast<std::size_t>(i)]) {
      const double boost = event(e.k, e.t) ? s_.psi[static_cast<std::size_t>(e.k)] : 0.0;
      ll += e.n * std::log(rho * (pi[static_cast<std::size_t>(e.k)] + boost));
    }
    return ll - rho * rate_exposure();
  }

  // sum_t sum_k (pi_k + E_tk psi_k) = T + sum_k psi_k * (#events of k)
  double rate_exposure() const {
    double x = T_;
    for (int k = 0; k < K_; ++k) x += s_.psi[static_cast<std::size_t>(k)] * events_[static_cast<std::size_t>(k)];
    return x;
  }

  double post_loglik() const {
    double ll = -log_factorials_;
    for (int i = 0; i < I_; ++i) ll += blog_loglik(i, pi_row(i), s_.rho[static_cast<std::size_t>(i)]);
    return ll;
  }

  void update_pi(int i) {
    const int Di = c_.blog_post_count(i);
    const auto alpha = cat_.dirichlet_params(s_.b[static_cast<std::size_t>(i)], cfg_.P);
    auto cur = pi_row(i);
    if (Di == 0) {
      const auto draw = draw_dirichlet(rng_, alpha);
      std::copy(draw.begin(), draw.end(), s_.pi.begin() + static_cast<std::ptrdiff_t>(i) * K_);
      return;
    }
    if (K_ == 1) return;
    std::vector<double> a_fwd(static_cast<std::size_t>(K_));
    for (int k = 0; k < K_; ++k) a_fwd[static_cast<std::size_t>(k)] = cur[static_cast<std::size_t>(k)] * Di;
    const auto prop = draw_dirichlet(rng_, a_fwd, 1e-10);
    std::vector<double> a_rev(static_cast<std::size_t>(K_));
    for (int k = 0; k < K_; ++k) a_rev[static_cast<std::size_t>(k)] = prop[static_cast<std::size_t>(k)] * Di;
    const double rho = s_.rho[static_cast<std::size_t>(i)];
    const double log_r = blog_loglik(i, prop, rho) - blog_loglik(i, cur, rho) + log_dirichlet_pdf(prop, alpha) -
                         log_dirichlet_pdf(cur, alpha) + log_dirichlet_pdf(cur, a_rev) - log_dirichlet_pdf(prop, a_fwd);
    const bool ok = accept(log_r);
    acc_.pi.record(ok);
    if (ok) std::copy(prop.begin(), prop.end(), s_.pi.begin() + static_cast<std::ptrdiff_t>(i) * K_);
  }

  void update_rho(int i) {
    const double cur = s_.rho[static_cast<std::size_t>(i)];
    const double prop = draw_truncated_normal_positive(rng_, cur, cfg_.sigma_rho);
    const auto pi = pi_row(i);
    const double log_r = blog_loglik(i, pi, prop) - blog_loglik(i, pi, cur) +
                         log_truncated_normal_pdf(prop, cfg_.rho_prior_mean, cfg_.rho_prior_sd) -
                         log_truncated_normal_pdf(cur, cfg_.rho_prior_mean, cfg_.rho_prior_sd) +
                         log_normal_cdf(cur / cfg_.sigma_rho) - log_normal_cdf(prop / cfg_.sigma_rho);
    const bool ok = accept(log_r);
    acc_.rho.record(ok);
    if (ok) s_.rho[static_cast<std::size_t>(i)] = prop;
  }

  // Change in the Poisson log-likelihood over all blogs when E_kt flips.
  double event_flip_delta(int k, int t) const {
    const bool on = event(k, t);
    const double psi = s_.psi[static_cast<std::size_t>(k)];
    double delta = 0.0;
    for (int i = 0; i < I_; ++i) {
      const double pik = s_.pi[static_cast<std::size_t>(i) * K_ + k];
      const double rho = s_.rho[static_cast<std::size_t>(i)];
      const int n = D_[cell(t, i, k)];
      const double with = n ? n * std::log(pik + psi) : 0.0;
      const double without = n ? n * std::log(pik) : 0.0;
      delta += on ? (without - with) + rho * psi : (with - without) - rho * psi;
    }
    return delta;
  }

  void update_events() {
    const double prior_on = std::log(cfg_.E_pi) - std::log1p(-cfg_.E_pi);
    for (int k = 0; k < K_; ++k)
      for (int t = 1; t <= T_; ++t) {
        const bool on = event(k, t);
        const double log_r = event_flip_delta(k, t) + (on ? -prior_on : prior_on);
        const bool ok = accept(log_r);
        acc_.E.record(ok);
        if (ok) {
          s_.E[static_cast<std::size_t>(k) * T_ + (t - 1)] = on ? 0 : 1;
          events_[static_cast<std::size_t>(k)] += on ? -1 : 1;
        }
      }
  }

  // Terms of the Poisson log-likelihood that depend on psi_k.
  double psi_loglik(int k, double psi) const {
    double ll = 0.0, rho_sum = 0.0;
    for (int i = 0; i < I_; ++i) rho_sum += s_.rho[static_cast<std::size_t>(i)];
    for (int t = 1; t <= T_; ++t) {
      if (!event(k, t)) continue;
      for (int i = 0; i < I_; ++i)
        if (const int n = D_[cell(t, i, k)]) ll += n * std::log(s_.pi[static_cast<std::size_t>(i) * K_ + k] + psi);
    }
    return ll - psi * events_[static_cast<std::size_t>(k)] * rho_sum;
  }

  void update_psi(int k) {
    const double cur = s_.psi[static_cast<std::size_t>(k)];
    const double prop = draw_truncated_normal_positive(rng_, cur, cfg_.sigma_psi);
    const double log_r = psi_loglik(k, prop) - psi_loglik(k, cur) +
                         log_truncated_normal_pdf(prop, cfg_.psi_prior_mean, cfg_.psi_prior_sd) -
                         log_truncated_normal_pdf(cur, cfg_.psi_prior_mean, cfg_.psi_prior_sd) +
                         log_normal_cdf(cur / cfg_.sigma_psi) - log_normal_cdf(prop / cfg_.sigma_psi);
    const bool ok = accept(log_r);
    acc_.psi.record(ok);
    if (ok) s_.psi[static_cast<std::size_t>(k)] = prop;
  }

  void node_stage() {
    rebuild_post_counts();
    for (int i = 0; i < I_; ++i) {
      update_pi(i);
      update_rho(i);
    }
    update_events();
    for (int k = 0; k < K_; ++k) update_psi(k);
  }

  // ---- stage 3: network coefficients ----

  std::vector<double> similarity_matrix() const {
    std::vector<double> sim(static_cast<std::size_t>(I_) * I_, 0.0);
    for (int i = 0; i < I_; ++i)
      for (int j = 0; j < I_; ++j)
        sim[static_cast<std::size_t>(i) * I_ + j] =
            block_similarity(s_.b[static_cast<std::size_t>(i)], s_.b[static_cast<std::size_t>(j)], pi_row(i), pi_row(j));
    return sim;
  }

  double link_loglik() const { return net_.loglik(s_.theta, similarity_matrix()); }

  void update_theta(int sub_updates) {
    const auto sim = similarity_matrix();
    double cur = net_.loglik(s_.theta, sim);
    auto log_prior = [&](double x) {
      const double u = (x - cfg_.mu_theta) / cfg_.sigma_theta;
      return -0.5 * u * u;
    };
    for (int r = 0; r < sub_updates; ++r)
      for (int p = 0; p < kNumCovariates; ++p) {
        Theta prop = s_.theta;
        prop[static_cast<std::size_t>(p)] += draw_normal(rng_, 0.0, cfg_.sigma_theta_prop[static_cast<std::size_t>(p)]);
        const double ll = net_.loglik(prop, sim);
        const double log_r = ll - cur + log_prior(prop[static_cast<std::size_t>(p)]) -
                             log_prior(s_.theta[static_cast<std::size_t>(p)]);
        const bool ok = accept(log_r);
        acc_.theta[static_cast<std::size_t>(p)].record(ok);
        if (ok) {
          s_.theta = prop;
          cur = ll;
        }
      }
  }

  // ---- stage 4: block assignment ----

  // Blocks whose interest set meets a topic blog i posted on; the all-topics
  // block alone when the blog has no assigned posts.
  std::vector<int> block_candidates(int i) const {
    std::vector<int> out;
    const int* n = &blog_topic_[static_cast<std::size_t>(i) * K_];
    for (int b = 0; b < cat_.size(); ++b)
      for (int k : cat_.topics(b))
        if (n[k] > 0) {
          out.push_back(b);
          break;
        }
    if (out.empty()) out.push_back(cat_.all_topics_block());
    return out;
  }

  // Link log-likelihood of both directions of every pair, once with the pair
  // in a shared block and once in different blocks. Fixed for a whole stage.
  void cache_pair_logliks() {
    same_.assign(static_cast<std::size_t>(I_) * I_, 0.0);
    diff_.assign(same_.size(), 0.0);
    for (int i = 0; i < I_; ++i)
      for (int j = i + 1; j < I_; ++j) {
        double dot = 0.0;
        for (int k = 0; k < K_; ++k) dot += pi_row(i)[static_cast<std::size_t>(k)] * pi_row(j)[static_cast<std::size_t>(k)];
        const double s = net_.pair_loglik(i, j, s_.theta, 1.0) + net_.pair_loglik(j, i, s_.theta, 1.0);
        const double d = net_.pair_loglik(i, j, s_.theta, dot) + net_.pair_loglik(j, i, s_.theta, dot);
        same_[static_cast<std::size_t>(i) * I_ + j] = same_[static_cast<std::size_t>(j) * I_ + i] = s;
        diff_[static_cast<std::size_t>(i) * I_ + j] = diff_[static_cast<std::size_t>(j) * I_ + i] = d;
      }
  }

  void recount_blocks() {
    std::fill(block_size_.begin(), block_size_.end(), 0);
    for (int b : s_.b) ++block_size_[static_cast<std::size_t>(b)];
    nonempty_ = 0;
    for (int n : block_size_) nonempty_ += n > 0;
  }

  int nonempty_blocks() const noexcept { return nonempty_; }

  // Log weights of the candidate blocks for blog i, with i taken out of the
  // block counts. Needs cache_pair_logliks() for the current theta and pi.
  std::vector<double> block_log_weights(int i, std::span<const int> cand) const {
    const int own = s_.b[static_cast<std::size_t>(i)];
    std::vector<double> link_gain(static_cast<std::size_t>(cat_.size()), 0.0);
    double base = 0.0;
    for (int j = 0; j < I_; ++j) {
      if (j == i) continue;
      const std::size_t ij = static_cast<std::size_t>(i) * I_ + j;
      base += diff_[ij];
      link_gain[static_cast<std::size_t>(s_.b[static_cast<std::size_t>(j)])] += same_[ij] - diff_[ij];
    }
    const double denom = std::log(cfg_.alpha_B * cat_.size() + I_ - 1);
    std::vector<double> w;
    w.reserve(cand.size());
    for (int b : cand) {
      const int others = block_size_[static_cast<std::size_t>(b)] - (b == own ? 1 : 0);
      const int nonempty = nonempty_ - (block_size_[static_cast<std::size_t>(own)] == 1 ? 1 : 0) + (others == 0 ? 1 : 0);
      const auto alpha = cat_.dirichlet_params(b, cfg_.P);
      w.push_back(std::log(others + cfg_.alpha_B) - denom + base + link_gain[static_cast<std::size_t>(b)] +
                  log_dirichlet_pdf(pi_row(i), alpha) + log_poisson_pmf(nonempty, cfg_.lambda_B));
    }
    return w;
  }

  void assign_block(int i) {
    const auto cand = block_candidates(i);
    auto w = block_log_weights(i, cand);
    normalize_log_weights(w);
    const int pick = cand[static_cast<std::size_t>(draw_categorical(rng_, w))];
    int& b = s_.b[static_cast<std::size_t>(i)];
    if (--block_size_[static_cast<std::size_t>(b)] == 0) --nonempty_;
    b = pick;
    if (block_size_[static_cast<std::size_t>(b)]++ == 0) ++nonempty_;
  }

  void block_stage(int sweeps) {
    if (sweeps <= 0) return;
    cache_pair_logliks();
    for (int s = 0; s < sweeps; ++s)
      for (int i = 0; i < I_; ++i) assign_block(i);
  }

  // Rebuilds every cache derived from the state, after edits through
  // mutable_state().
  void refresh() {
    rebuild_post_counts();
    for (int k = 0; k < K_; ++k)
      events_[static_cast<std::size_t>(k)] = static_cast<int>(std::count(
          s_.E.begin() + static_cast<std::ptrdiff_t>(k) * T_, s_.E.begin() + static_cast<std::ptrdiff_t>(k + 1) * T_, 1));
    recount_blocks();
  }

  // ---- schedule ----

  void iterate() {
    topic_stage();
    node_stage();
    update_theta(cfg_.net_updates);
    block_stage(cfg_.block_sweeps);
  }

  DrawSnapshot snapshot(int iteration) const {
    return {iteration, s_.z, s_.b, s_.pi, s_.rho, s_.E, s_.psi, s_.theta};
  }

 private:
  struct Count {
    int t, k, n;
  };

  std::size_t cell(int t, int i, int k) const {
    return (static_cast<std::size_t>(t - 1) * I_ + static_cast<std::size_t>(i)) * K_ + static_cast<std::size_t>(k);
  }

  bool accept(double log_r) {
    if (log_r >= 0.0) return true;
    return std::log(uniform01(rng_)) < log_r;
  }

  const Corpus& c_;
  const NetworkDesign& net_;
  ModelConfig cfg_;
  BlockCatalog cat_;
  int K_, I_, T_;
  Rng rng_;
  SamplerState s_;
  WindowCounts counts_;
  GsdmmScorer scorer_;
  bool uniform_xi_ = false;
  long xi_fallbacks_ = 0;
  std::vector<double> xi_, prob_;

  std::vector<int> D_;           // (t, i, k) post counts under z
  std::vector<int> blog_topic_;  // (i, k) post counts under z
  std::vector<std::vector<Count>> nonzero_;
  double log_factorials_ = 0.0;
  std::vector<int> events_;  // events per topic

  std::vector<double> same_, diff_;
  std::vector<int> block_size_;
  int nonempty_ = 0;

  AcceptanceTable acc_;
};

struct SamplerOptions {
  std::uint64_t stream = 0;
  std::function<void(const IterationLog&)> on_iteration;
};

inline PosteriorDraws run_sampler(const Corpus& corpus, const NetworkDesign& design, const ModelConfig& cfg,
                                  const SamplerOptions& opt = {}) {
  Sampler s(corpus, design, cfg, opt.stream);
  PosteriorDraws out{cfg.K, corpus.num_blogs(), corpus.horizon(), corpus.num_posts(), {}};
  if (cfg.iters <= cfg.burn_in) return out;
  out.draws.reserve(static_cast<std::size_t>(cfg.retained_draws()));
  s.initialize();
  AcceptanceTable before;
  for (int it = 1; it <= cfg.iters; ++it) {
    s.iterate();
    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      out.draws.push_back(s.snapshot(it));
      if (cfg.audit) check_snapshot(out.draws.back(), cfg.K);
    }
    if (opt.on_iteration) {
      IterationLog log;
      log.iteration = it;
      log.acceptance = s.acceptance();
      log.acceptance -= before;
      before = s.acceptance();
      log.post_loglik = s.post_loglik();
      log.link_loglik = s.link_loglik();
      log.nonempty_blocks = s.nonempty_blocks();
      log.xi_fallbacks = s.xi_fallbacks();
      opt.on_iteration(log);
    }
  }
  return out;
}

inline PosteriorDraws run_sampler(const Corpus& corpus, const AdjacencyTensor& links, const ModelConfig& cfg,
                                  const SamplerOptions& opt = {}) {
  const NetworkDesign design(links);
  return run_sampler(corpus, design, cfg, opt);
}

}  // namespace dtn
