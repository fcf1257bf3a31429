#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "dtn/genmodel.hpp"
#include "dtn/sampler.hpp"

using namespace dtn;

namespace {

ModelConfig small_config(int K) {
  ModelConfig c;
  c.K = K;
  c.ell = 3;
  c.iters = 12;
  c.burn_in = 4;
  c.thin = 2;
  c.sweeps = 2;
  c.net_updates = 2;
  c.block_sweeps = 2;
  c.seed = 17;
  return c;
}

Simulation small_simulation(std::uint64_t seed, int K = 3) {
  ModelConfig c = small_config(K);
  c.sim.blogs = 8;
  c.sim.days = 10;
  c.sim.vocab_size = 30;
  c.lambda_D = 12;
  c.sim.theta = {-3.0, 1.0, 0.5, 0.1, 0.1};
  c.eta = {0.2};
  Rng rng = make_rng(seed, 5);
  return simulate(c, rng);
}

double log_dirichlet(std::span<const double> x, std::span<const double> a) {
  double lp = 0.0, s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    lp += (a[k] - 1.0) * std::log(x[k]) - std::lgamma(a[k]);
    s += a[k];
  }
  return lp + std::lgamma(s);
}

// Full Poisson log-likelihood of the daily topic counts, every cell included.
double direct_post_loglik(const Corpus& c, const SamplerState& s, int K) {
  const int I = c.num_blogs(), T = c.horizon();
  std::vector<int> D(static_cast<std::size_t>(T + 1) * I * K, 0);
  for (int d = 0; d < c.num_posts(); ++d) ++D[(c.post(d).day * I + c.post(d).blog) * K + s.z[d]];
  double ll = 0.0;
  for (int t = 1; t <= T; ++t)
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k) {
        const double lam = s.rho[i] * (s.pi[i * K + k] + (s.E[k * T + t - 1] ? s.psi[k] : 0.0));
        const int n = D[(t * I + i) * K + k];
        ll += n * std::log(lam) - lam - std::lgamma(n + 1.0);
      }
  return ll;
}

}  // namespace

TEST(Sampler, SameSeedSameDraws) {
  const auto sim = small_simulation(1);
  const auto cfg = small_config(3);
  const auto a = run_sampler(sim.corpus, sim.links, cfg);
  const auto b = run_sampler(sim.corpus, sim.links, cfg);
  EXPECT_EQ(a, b);
  auto other = cfg;
  other.seed = 18;
  EXPECT_NE(a, run_sampler(sim.corpus, sim.links, other));
}

TEST(Sampler, RetainsThinnedDraws) {
  const auto sim = small_simulation(2);
  const auto cfg = small_config(3);
  std::vector<IterationLog> logs;
  SamplerOptions opt;
  opt.on_iteration = [&](const IterationLog& l) { logs.push_back(l); };
  const auto pd = run_sampler(sim.corpus, sim.links, cfg, opt);
  ASSERT_EQ(pd.size(), 4u);
  EXPECT_EQ(pd.draws[0].iteration, 6);
  EXPECT_EQ(pd.draws[3].iteration, 12);
  ASSERT_EQ(logs.size(), 12u);
  for (const auto& l : logs) {
    for (const auto* a : {&l.acceptance.pi, &l.acceptance.rho, &l.acceptance.E, &l.acceptance.psi}) {
      EXPECT_GE(a->rate(), 0.0);
      EXPECT_LE(a->rate(), 1.0);
      EXPECT_LE(a->accepted, a->proposed);
    }
    EXPECT_EQ(l.acceptance.theta[0].proposed, cfg.net_updates);
  }
  for (const auto& d : pd.draws) {
    EXPECT_NO_THROW(check_snapshot(d, 3));
    for (int z : d.z) EXPECT_TRUE(z >= 0 && z < 3);
    for (double r : d.rho) EXPECT_GT(r, 0.0);
    for (double p : d.psi) EXPECT_GT(p, 0.0);
  }
}

TEST(Sampler, InitialState) {
  const auto sim = small_simulation(3);
  const NetworkDesign design(sim.links);
  Sampler s(sim.corpus, design, small_config(3));
  s.initialize();
  const auto& st = s.state();
  for (int z : st.z) EXPECT_GE(z, 0);
  for (int i = 0; i < sim.corpus.num_blogs(); ++i) {
    const int Di = sim.corpus.blog_post_count(i);
    EXPECT_DOUBLE_EQ(st.rho[i], Di > 0 ? double(Di) / sim.corpus.horizon() : 0.5 / sim.corpus.horizon());
    const auto cand = s.block_candidates(i);
    EXPECT_NE(std::find(cand.begin(), cand.end(), st.b[i]), cand.end());
  }
  for (auto e : st.E) EXPECT_EQ(e, 0);
  for (double v : st.theta) EXPECT_EQ(v, 0.0);
  EXPECT_NO_THROW(audit_window(s.window(), sim.corpus, st.z));
}

TEST(Sampler, RejectsMismatchedNetwork) {
  const auto sim = small_simulation(4);
  const NetworkDesign wrong(AdjacencyTensor(sim.corpus.num_blogs() + 1, sim.corpus.horizon(), {}));
  EXPECT_THROW(Sampler(sim.corpus, wrong, small_config(3)), ConfigError);
}

TEST(Sampler, PostLikelihoodMatchesDirectSum) {
  const auto sim = small_simulation(5);
  const NetworkDesign design(sim.links);
  Sampler s(sim.corpus, design, small_config(3));
  s.initialize();
  auto& st = s.mutable_state();
  st.E[1] = st.E[7] = st.E[15] = 1;
  st.psi = {0.3, 0.9, 1.7};
  s.refresh();
  EXPECT_NEAR(s.post_loglik(), direct_post_loglik(sim.corpus, st, 3), 1e-8);
}

TEST(Sampler, EventFlipAndBoostDeltasMatchFullLikelihood) {
  const auto sim = small_simulation(6);
  const NetworkDesign design(sim.links);
  Sampler s(sim.corpus, design, small_config(3));
  s.initialize();
  auto& st = s.mutable_state();
  st.psi = {0.4, 0.8, 1.2};
  st.E[2] = 1;
  s.refresh();
  const int T = sim.corpus.horizon();
  for (int k = 0; k < 3; ++k)
    for (int t = 1; t <= T; t += 3) {
      const double before = s.post_loglik();
      const double delta = s.event_flip_delta(k, t);
      auto& e = st.E[k * T + t - 1];
      e = !e;
      s.refresh();
      EXPECT_NEAR(s.post_loglik() - before, delta, 1e-9) << k << " " << t;
    }
  for (int k = 0; k < 3; ++k) {
    const double a = s.psi_loglik(k, 0.5), b = s.psi_loglik(k, 2.5);
    st.psi[k] = 0.5;
    s.refresh();
    const double la = s.post_loglik();
    st.psi[k] = 2.5;
    s.refresh();
    EXPECT_NEAR(s.post_loglik() - la, b - a, 1e-9);
  }
}

// Every candidate's block weight, up to one shared constant, against the
// full network likelihood from direct covariates and the priors counted
// from scratch.
TEST(Sampler, BlockWeightsMatchBruteForce) {
  const auto sim = small_simulation(7, 4);
  const NetworkDesign design(sim.links);
  auto cfg = small_config(4);
  cfg.alpha_B = 0.7;
  cfg.lambda_B = 3.0;
  Sampler s(sim.corpus, design, cfg);
  s.initialize();
  auto& st = s.mutable_state();
  st.theta = {-2.0, 1.3, 0.4, 0.05, 0.1};
  s.refresh();
  s.cache_pair_logliks();
  const int I = sim.corpus.num_blogs(), T = sim.corpus.horizon(), K = 4;
  const BlockCatalog& cat = s.catalog();
  for (int i = 0; i < I; ++i) {
    const auto cand = s.block_candidates(i);
    const auto w = s.block_log_weights(i, cand);
    std::vector<double> oracle;
    const int own = st.b[i];
    for (int b : cand) {
      std::vector<int> blocks = st.b;
      blocks[i] = b;
      double link = 0.0;
      for (int t = 1; t <= T; ++t)
        for (int x = 0; x < I; ++x)
          for (int y = 0; y < I; ++y) {
            if (x == y) continue;
            const std::span<const double> px(&st.pi[x * K], K), py(&st.pi[y * K], K);
            const double p = link_probability(st.theta, covariates(x, y, t, sim.links, block_similarity(blocks[x], blocks[y], px, py)));
            link += sim.links.at(t, x, y) ? std::log(p) : std::log1p(-p);
          }
      int others = 0;
      std::set<int> used;
      for (int j = 0; j < I; ++j) {
        used.insert(blocks[j]);
        if (j != i && blocks[j] == b) ++others;
      }
      const auto alpha = cat.dirichlet_params(b, cfg.P);
      const double n = static_cast<double>(used.size());
      oracle.push_back(std::log(others + cfg.alpha_B) + link +
                       log_dirichlet(std::span<const double>(&st.pi[i * K], K), alpha) + n * std::log(cfg.lambda_B) -
                       cfg.lambda_B - std::lgamma(n + 1.0));
    }
    for (std::size_t c = 1; c < cand.size(); ++c)
      EXPECT_NEAR(w[c] - w[0], oracle[c] - oracle[0], 1e-7) << "blog " << i << " block " << cand[c];
    EXPECT_EQ(st.b[i], own);
  }
}

// ---- single updates against posteriors known in closed form ----

namespace {

struct OneBlog {
  Corpus corpus;
  AdjacencyTensor links;
};

// One blog, T days; `posts[k]` posts of topic k scattered over the days.
OneBlog one_blog(int T, const std::vector<int>& posts) {
  std::vector<Post> out;
  int day = 1;
  for (std::size_t k = 0; k < posts.size(); ++k)
    for (int n = 0; n < posts[k]; ++n) {
      Post p;
      p.day = day;
      day = day % T + 1;
      p.tokens = {{static_cast<int>(k), 1}};
      p.total_tokens = 1;
      out.push_back(p);
    }
  std::vector<std::string> vocab;
  for (std::size_t k = 0; k < posts.size(); ++k) vocab.push_back("t" + std::to_string(k));
  return {Corpus(Vocabulary(vocab), {"b"}, out, T), AdjacencyTensor(1, T, {})};
}

// z aligned with the token (topic k posts use token k).
void set_topics_from_tokens(Sampler& s, const Corpus& c) {
  for (int d = 0; d < c.num_posts(); ++d) s.mutable_state().z[d] = c.post(d).tokens[0].token;
}

}  // namespace

// Under a flat prior, rho | counts is Gamma(D + 1, T) when there are no events.
TEST(Sampler, RhoUpdateTargetsGammaPosterior) {
  const int T = 20;
  const auto data = one_blog(T, {2});
  const NetworkDesign design(data.links);
  auto cfg = small_config(1);
  cfg.rho_prior_sd = 1e6;
  cfg.sigma_rho = 0.1;
  Sampler s(data.corpus, design, cfg);
  s.initialize();
  s.refresh();
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int r = 0; r < n; ++r) {
    s.update_rho(0);
    const double x = s.state().rho[0];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n, var = sum2 / n - mean * mean;
  EXPECT_NEAR(mean, 3.0 / T, 0.004);
  EXPECT_NEAR(var, 3.0 / (T * T), 0.0015);
}

// With no events, pi | counts is Dirichlet(alpha_b + n).
TEST(Sampler, PiUpdateTargetsDirichletPosterior) {
  const auto data = one_blog(10, {6, 2, 1});
  const NetworkDesign design(data.links);
  auto cfg = small_config(3);
  Sampler s(data.corpus, design, cfg);
  s.initialize();
  set_topics_from_tokens(s, data.corpus);
  s.mutable_state().b[0] = 0;  // interest in topic 0 only
  s.refresh();
  const auto alpha = s.catalog().dirichlet_params(0, cfg.P);
  const std::vector<double> post{alpha[0] + 6, alpha[1] + 2, alpha[2] + 1};
  const double total = post[0] + post[1] + post[2];
  std::vector<double> mean(3, 0.0);
  const int n = 100000;
  for (int r = 0; r < n; ++r) {
    s.update_pi(0);
    for (int k = 0; k < 3; ++k) mean[k] += s.pi_row(0)[k] / n;
  }
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(mean[k], post[k] / total, 0.01) << k;
}

// psi | rest with a flat prior: density proportional to
// prod_t (pi + psi)^n_t exp(-rho psi #events). Mean by quadrature.
TEST(Sampler, PsiUpdateTargetsOneDimensionalPosterior) {
  const int T = 6;
  const auto data = one_blog(T, {9});
  const NetworkDesign design(data.links);
  auto cfg = small_config(1);
  cfg.psi_prior_sd = 1e6;
  Sampler s(data.corpus, design, cfg);
  s.initialize();
  auto& st = s.mutable_state();
  st.rho[0] = 1.2;
  std::fill(st.E.begin(), st.E.end(), 0);
  st.E[0] = st.E[1] = 1;  // events on days 1 and 2
  s.refresh();
  int n_event = 0;
  for (int d = 0; d < data.corpus.num_posts(); ++d) n_event += data.corpus.post(d).day <= 2;
  double num = 0.0, den = 0.0;
  for (double x = 0.00005; x < 40.0; x += 0.0001) {
    const double lp = n_event * std::log(1.0 + x) - 1.2 * x * 2;
    num += x * std::exp(lp);
    den += std::exp(lp);
  }
  double mean = 0.0;
  const int n = 200000;
  for (int r = 0; r < n; ++r) {
    s.update_psi(0);
    mean += s.state().psi[0] / n;
  }
  EXPECT_NEAR(mean, num / den, 0.03 * num / den);
}

TEST(Sampler, AuditCatchesCorruptedTopics) {
  const auto sim = small_simulation(8);
  const NetworkDesign design(sim.links);
  Sampler s(sim.corpus, design, small_config(3));
  s.initialize();
  s.sweep_topics(5, 1);
  s.mutable_state().z[sim.corpus.posts_on_day(5)[0]] ^= 1;
  EXPECT_THROW(audit_window(s.window(), sim.corpus, s.state().z), AuditError);
}
