#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "dtn/blocks.hpp"
#include "dtn/config.hpp"
#include "dtn/corpus.hpp"
#include "dtn/network.hpp"
#include "dtn/random.hpp"

namespace dtn {

// Per-day topic token distributions V_kt, days 1..T.
struct TopicChain {
  int K = 0, T = 0, W = 0;
  std::vector<double> V;

  std::span<const double> row(int k, int t) const {
    return {V.data() + (static_cast<std::size_t>(k) * T + static_cast<std::size_t>(t - 1)) * W, static_cast<std::size_t>(W)};
  }
  std::span<double> row(int k, int t) {
    return {V.data() + (static_cast<std::size_t>(k) * T + static_cast<std::size_t>(t - 1)) * W, static_cast<std::size_t>(W)};
  }
};

// a_kt: mean of the previous min(ell, t-1) days of topic k (t > 1).
inline std::vector<double> topic_concentration(const TopicChain& c, int k, int t, int ell) {
  std::vector<double> a(static_cast<std::size_t>(c.W), 0.0);
  const int m = std::min(ell, t - 1);
  for (int u = t - m; u < t; ++u) {
    auto r = c.row(k, u);
    for (int w = 0; w < c.W; ++w) a[static_cast<std::size_t>(w)] += r[static_cast<std::size_t>(w)];
  }
  for (double& v : a) v /= m;
  return a;
}

// Day 1 draws from `initial`; each later day draws from the mean of the
// previous min(ell, t-1) days, sequentially in t.
inline TopicChain sample_topic_chain(int K, int T, int ell, std::span<const double> initial, Rng& rng) {
  TopicChain c{K, T, static_cast<int>(initial.size()), {}};
  c.V.resize(static_cast<std::size_t>(K) * T * c.W);
  for (int t = 1; t <= T; ++t) {
    for (int k = 0; k < K; ++k) {
      const auto conc = t == 1 ? std::vector<double>(initial.begin(), initial.end()) : topic_concentration(c, k, t, ell);
      const auto draw = draw_dirichlet(rng, conc);
      std::copy(draw.begin(), draw.end(), c.row(k, t).begin());
    }
  }
  return c;
}

inline TopicChain sample_topic_chain(const ModelConfig& cfg, int T, int W, Rng& rng) {
  const std::vector<double> initial(static_cast<std::size_t>(W), cfg.beta);
  return sample_topic_chain(cfg.K, T, cfg.ell, initial, rng);
}

// K x T event indicators, row-major by topic: E[k * T + (t - 1)].
inline std::vector<std::uint8_t> sample_events(std::span<const double> eta, int K, int T, Rng& rng) {
  std::vector<std::uint8_t> E(static_cast<std::size_t>(K) * T);
  for (int k = 0; k < K; ++k) {
    const double p = eta.size() == 1 ? eta[0] : eta[static_cast<std::size_t>(k)];
    for (int t = 0; t < T; ++t) E[static_cast<std::size_t>(k) * T + t] = draw_bernoulli(rng, p);
  }
  return E;
}

inline double sample_psi(double a_psi, double b_psi, Rng& rng) { return draw_gamma(rng, a_psi, b_psi); }
inline double sample_rho(double a_rho, double b_rho, Rng& rng) { return draw_gamma(rng, a_rho, b_rho); }

// lambda_tki = rho_i pi_ik + rho_i E_tk psi_k
inline double post_rate(double rho, double pi, bool event, double psi) {
  return rho * pi + rho * (event ? psi : 0.0);
}

// Block membership probabilities p_B.
inline std::vector<double> block_probabilities(const BlockCatalog& cat, BlockPrior prior) {
  const int B = cat.size();
  std::vector<double> p(static_cast<std::size_t>(B), 1.0 / B);
  if (prior == BlockPrior::category) {
    std::vector<int> per_size(4, 0);
    auto category = [&](int b) {
      if (b == cat.all_topics_block()) return 3;
      return static_cast<int>(cat.topics(b).size()) - 1;
    };
    for (int b = 0; b < B; ++b) ++per_size[static_cast<std::size_t>(category(b))];
    int used = 0;
    for (int n : per_size) used += n > 0;
    for (int b = 0; b < B; ++b) p[static_cast<std::size_t>(b)] = 1.0 / used / per_size[static_cast<std::size_t>(category(b))];
  }
  return p;
}

// Latent state of a simulated data set.
struct GroundTruth {
  int K = 0, I = 0, T = 0;
  std::vector<int> z;            // per post
  std::vector<int> b;            // per blog
  std::vector<double> pi;        // I x K
  std::vector<double> rho;       // I
  std::vector<std::uint8_t> E;   // K x T
  std::vector<double> psi;       // K
  Theta theta{};

  std::span<const double> pi_row(int i) const {
    return {pi.data() + static_cast<std::size_t>(i) * K, static_cast<std::size_t>(K)};
  }
};

struct Simulation {
  Corpus corpus;
  AdjacencyTensor links;
  GroundTruth truth;
  TopicChain chain;
};

inline std::vector<std::string> numbered_names(const char* prefix, int n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Post counts D_tki ~ Poisson(lambda_tki) and token draws from V_kt. Posts are
// stored day-major, then blog, then topic; ground-truth topics are recorded.
inline Corpus sample_posts_and_tokens(const TopicChain& chain, const GroundTruth& g, double lambda_D,
                                      const Vocabulary& vocab, const std::vector<std::string>& blog_names, Rng& rng) {
  if (!(lambda_D > 0.0)) throw ConfigError("lambda_D must be positive");
  std::vector<Post> posts;
  std::vector<std::discrete_distribution<int>> token_dist(static_cast<std::size_t>(g.K));
  std::vector<int> counts(static_cast<std::size_t>(chain.W));
  for (int t = 1; t <= g.T; ++t) {
    for (int k = 0; k < g.K; ++k) {
      auto row = chain.row(k, t);
      token_dist[static_cast<std::size_t>(k)] = std::discrete_distribution<int>(row.begin(), row.end());
    }
    for (int i = 0; i < g.I; ++i) {
      for (int k = 0; k < g.K; ++k) {
        const double lambda = post_rate(g.rho[static_cast<std::size_t>(i)], g.pi_row(i)[static_cast<std::size_t>(k)],
                                        g.E[static_cast<std::size_t>(k) * g.T + (t - 1)] != 0,
                                        g.psi[static_cast<std::size_t>(k)]);
        const int n_posts = draw_poisson(rng, lambda);
        for (int d = 0; d < n_posts; ++d) {
          Post p;
          p.blog = i;
          p.day = t;
          p.topic = k;
          const int len = draw_poisson(rng, lambda_D);
          std::fill(counts.begin(), counts.end(), 0);
          for (int s = 0; s < len; ++s) ++counts[static_cast<std::size_t>(token_dist[static_cast<std::size_t>(k)](rng))];
          for (int w = 0; w < chain.W; ++w)
            if (counts[static_cast<std::size_t>(w)]) p.tokens.push_back({w, counts[static_cast<std::size_t>(w)]});
          p.total_tokens = len;
          posts.push_back(std::move(p));
        }
      }
    }
  }
  return Corpus(vocab, blog_names, std::move(posts), g.T);
}

// Links day by day, each a Bernoulli draw with covariates from earlier days.
inline AdjacencyTensor sample_network(const GroundTruth& g, Rng& rng) {
  std::vector<double> sim(static_cast<std::size_t>(g.I) * g.I, 0.0);
  for (int i = 0; i < g.I; ++i)
    for (int j = 0; j < g.I; ++j)
      sim[static_cast<std::size_t>(i) * g.I + j] =
          block_similarity(g.b[static_cast<std::size_t>(i)], g.b[static_cast<std::size_t>(j)], g.pi_row(i), g.pi_row(j));
  LinkHistory hist(g.I);
  std::vector<Edge> edges;
  std::vector<std::pair<int, int>> today;
  for (int t = 1; t <= g.T; ++t) {
    today.clear();
    for (int i = 0; i < g.I; ++i)
      for (int j = 0; j < g.I; ++j) {
        if (i == j) continue;
        const double p = link_probability(g.theta, hist.covariates(i, j, sim[static_cast<std::size_t>(i) * g.I + j]));
        if (sample_link(p, rng)) {
          today.emplace_back(i, j);
          edges.push_back({t, i, j});
        }
      }
    hist.record_day(today);
  }
  return AdjacencyTensor(g.I, g.T, std::move(edges));
}

// Full forward simulation of topics, events, blocks, posts, tokens and links.
inline Simulation simulate(const ModelConfig& cfg, Rng& rng) {
  require_valid(cfg);
  const int K = cfg.K, I = cfg.sim.blogs, T = cfg.sim.days, W = cfg.sim.vocab_size;
  Simulation s;
  s.chain = sample_topic_chain(cfg, T, W, rng);

  GroundTruth& g = s.truth;
  g.K = K;
  g.I = I;
  g.T = T;
  g.theta = cfg.sim.theta;
  g.E = sample_events(cfg.eta, K, T, rng);
  g.psi.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    g.psi[static_cast<std::size_t>(k)] =
        cfg.sim.psi.empty() ? sample_psi(cfg.a_psi, cfg.b_psi, rng) : cfg.sim.psi[static_cast<std::size_t>(k)];

  const BlockCatalog cat(K);
  const auto pB = block_probabilities(cat, cfg.sim.block_prior);
  std::discrete_distribution<int> block_dist(pB.begin(), pB.end());
  g.b.resize(static_cast<std::size_t>(I));
  g.pi.resize(static_cast<std::size_t>(I) * K);
  g.rho.resize(static_cast<std::size_t>(I));
  for (int i = 0; i < I; ++i) {
    g.b[static_cast<std::size_t>(i)] = block_dist(rng);
    const auto alpha = cat.dirichlet_params(g.b[static_cast<std::size_t>(i)], cfg.P);
    const auto pi = draw_dirichlet(rng, alpha);
    std::copy(pi.begin(), pi.end(), g.pi.begin() + static_cast<std::ptrdiff_t>(i) * K);
    g.rho[static_cast<std::size_t>(i)] = sample_rho(cfg.a_rho, cfg.b_rho, rng);
  }

  const Vocabulary vocab(numbered_names("w", W));
  s.corpus = sample_posts_and_tokens(s.chain, g, cfg.lambda_D, vocab, numbered_names("", I), rng);
  g.z.reserve(static_cast<std::size_t>(s.corpus.num_posts()));
  for (const Post& p : s.corpus.posts()) g.z.push_back(*p.topic);
  s.links = sample_network(g, rng);
  return s;
}

}  // namespace dtn
