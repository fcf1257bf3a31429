#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dtn/config.hpp"
#include "dtn/corpus.hpp"
#include "dtn/draws.hpp"
#include "dtn/error.hpp"
#include "dtn/sampler.hpp"
#include "dtn/window_counts.hpp"

namespace dtn {

// ---- partition agreement ----

// Hubert-Arabie adjusted Rand index. Partitions with no chance structure to
// correct for (n = 1, or both sides all-one-cluster or all-singletons) score 1.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error("partitions differ in length: " + std::to_string(a.size()) + " vs " +
                                        std::to_string(b.size()));
  if (a.empty()) throw Error("partitions are empty");
  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> rows, cols;
  for (std::size_t n = 0; n < a.size(); ++n) {
    ++joint[{a[n], b[n]}];
    ++rows[a[n]];
    ++cols[b[n]];
  }
  auto pairs = [](std::int64_t x) { return x * (x - 1) / 2; };
  std::int64_t index = 0, sum_a = 0, sum_b = 0;
  for (const auto& [_, c] : joint) index += pairs(c);
  for (const auto& [_, c] : rows) sum_a += pairs(c);
  for (const auto& [_, c] : cols) sum_b += pairs(c);
  const auto total = pairs(static_cast<std::int64_t>(a.size()));
  if (total == 0) return 1.0;
  // (index - expected) / (max - expected) with both sides scaled by 2 * total,
  // so numerator and denominator are exact integers and only the final
  // division rounds
  using wide = __int128;
  const wide num = 2 * wide{index} * total - 2 * wide{sum_a} * sum_b;
  const wide den = wide{sum_a + sum_b} * total - 2 * wide{sum_a} * sum_b;
  if (den == 0) return 1.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

// ARI between consecutive retained draws, for z and b.
struct AriSeries {
  std::vector<double> z, b;
};

inline AriSeries ari_series(const PosteriorDraws& pd) {
  AriSeries out;
  for (std::size_t s = 1; s < pd.size(); ++s) {
    out.z.push_back(pd.draws[s].z.empty() ? 1.0 : adjusted_rand_index(pd.draws[s - 1].z, pd.draws[s].z));
    out.b.push_back(adjusted_rand_index(pd.draws[s - 1].b, pd.draws[s].b));
  }
  return out;
}

// ---- posterior summaries ----

struct Summary {
  std::string name;
  double mean = 0.0, sd = 0.0, lo = 0.0, hi = 0.0;
};

// Central empirical interval: lower index floor(q (n-1)), upper index
// ceil((1-q) (n-1)) of the sorted sample, so at least 1-2q of it is inside.
inline Summary summarize_values(std::string name, std::vector<double> v, double q = 0.025) {
  if (v.empty()) throw Error("no draws to summarize for " + name);
  Summary s{std::move(name)};
  const auto n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  std::sort(v.begin(), v.end());
  const double last = n - 1.0;
  s.lo = v[static_cast<std::size_t>(std::floor(q * last))];
  s.hi = v[static_cast<std::size_t>(std::ceil((1.0 - q) * last))];
  return s;
}

// Every scalar parameter family: theta, psi, rho, pi.
inline std::vector<Summary> summarize(const PosteriorDraws& pd) {
  if (pd.empty()) throw Error("posterior draws are empty");
  std::vector<Summary> out;
  auto collect = [&](std::string name, auto get) {
    std::vector<double> v;
    v.reserve(pd.size());
    for (const auto& d : pd.draws) v.push_back(get(d));
    out.push_back(summarize_values(std::move(name), std::move(v)));
  };
  for (std::size_t p = 0; p < kNumCovariates; ++p)
    collect("theta" + std::to_string(p), [p](const DrawSnapshot& d) { return d.theta[p]; });
  for (int k = 0; k < pd.K; ++k)
    collect("psi[" + std::to_string(k) + "]", [k](const DrawSnapshot& d) { return d.psi[static_cast<std::size_t>(k)]; });
  for (int i = 0; i < pd.I; ++i)
    collect("rho[" + std::to_string(i) + "]", [i](const DrawSnapshot& d) { return d.rho[static_cast<std::size_t>(i)]; });
  for (int i = 0; i < pd.I; ++i)
    for (int k = 0; k < pd.K; ++k)
      collect("pi[" + std::to_string(i) + "," + std::to_string(k) + "]",
              [&pd, i, k](const DrawSnapshot& d) { return d.pi[static_cast<std::size_t>(i) * pd.K + k]; });
  return out;
}

inline const Summary& find_summary(const std::vector<Summary>& all, std::string_view name) {
  for (const auto& s : all)
    if (s.name == name) return s;
  throw Error("no summary named " + std::string(name));
}

struct ModalAssignments {
  std::vector<int> z, b;
};

namespace detail {

inline std::vector<int> modal_labels(const PosteriorDraws& pd, std::vector<int> DrawSnapshot::*field, int num_labels) {
  const std::size_t n = (pd.draws.front().*field).size();
  std::vector<int> out(n, 0);
  std::vector<int> tally(static_cast<std::size_t>(num_labels));
  for (std::size_t x = 0; x < n; ++x) {
    std::fill(tally.begin(), tally.end(), 0);
    for (const auto& d : pd.draws) {
      const int v = (d.*field)[x];
      if (v >= 0 && v < num_labels) ++tally[static_cast<std::size_t>(v)];
    }
    // max_element keeps the first maximum, i.e. the lowest label on ties
    out[x] = static_cast<int>(std::max_element(tally.begin(), tally.end()) - tally.begin());
  }
  return out;
}

}  // namespace detail

inline ModalAssignments map_assignments(const PosteriorDraws& pd) {
  if (pd.empty()) throw Error("posterior draws are empty");
  return {detail::modal_labels(pd, &DrawSnapshot::z, pd.K),
          detail::modal_labels(pd, &DrawSnapshot::b, BlockCatalog(pd.K).size())};
}

// ---- token salience within a topic window ----

// P(Z = k | w in d) by Bayes' rule with P(w | k) = N*w_k / N*_k and
// P(k) = m*_k / |D_window|. Missing when w has no mass in any topic.
inline std::optional<double> predictive_token_prob(const WindowCounts& wc, int w, int k) {
  if (wc.window_posts() == 0) return std::nullopt;
  double num = 0.0, den = 0.0;
  for (int q = 0; q < wc.num_topics(); ++q) {
    if (wc.tokens(q) == 0) continue;
    const double v = static_cast<double>(wc.token(q, w)) / static_cast<double>(wc.tokens(q)) *
                     static_cast<double>(wc.posts(q)) / static_cast<double>(wc.window_posts());
    den += v;
    if (q == k) num = v;
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

// WF over the whole vocabulary for topic k: predictive probability times the
// token's window frequency in k, normalized. Missing for an empty topic window.
inline std::optional<std::vector<double>> weighted_frequency(const WindowCounts& wc, int k) {
  const long nk = wc.tokens(k);
  if (nk == 0) return std::nullopt;
  std::vector<double> wf(static_cast<std::size_t>(wc.vocab_size()), 0.0);
  double total = 0.0;
  for (int w = 0; w < wc.vocab_size(); ++w) {
    const int n = wc.token(k, w);
    if (n == 0) continue;
    const auto p = predictive_token_prob(wc, w, k);
    const double v = p.value_or(0.0) * static_cast<double>(n) / static_cast<double>(nk);
    wf[static_cast<std::size_t>(w)] = v;
    total += v;
  }
  if (!(total > 0.0)) return std::nullopt;
  for (double& v : wf) v /= total;
  return wf;
}

struct WfPoint {
  int day = 0;
  int token = 0;
  int defined = 0;  // draws in which WF was defined
  double mean = 0.0, lo = 0.0, hi = 0.0;
};

// WF of each requested token in topic k for every day, averaged over draws,
// with a central 95% band. Days where no draw defines WF are omitted.
inline std::vector<WfPoint> wf_series(const Corpus& c, const PosteriorDraws& pd, int ell, int k,
                                      std::span<const int> tokens) {
  if (k < 0 || k >= pd.K) throw Error("topic " + std::to_string(k) + " out of range");
  for (int w : tokens)
    if (w < 0 || w >= c.vocab_size()) throw Error("token id " + std::to_string(w) + " out of range");
  const int T = c.horizon();
  // values[day][token][draw]
  std::vector<std::vector<std::vector<double>>> values(
      static_cast<std::size_t>(T), std::vector<std::vector<double>>(tokens.size()));
  for (const auto& d : pd.draws) {
    WindowCounts wc(pd.K, c.vocab_size(), ell);
    for (int t = 1; t <= T; ++t) {
      wc.advance(c, d.z, t);
      const auto wf = weighted_frequency(wc, k);
      if (!wf) continue;
      for (std::size_t x = 0; x < tokens.size(); ++x)
        values[static_cast<std::size_t>(t - 1)][x].push_back((*wf)[static_cast<std::size_t>(tokens[x])]);
    }
  }
  std::vector<WfPoint> out;
  for (int t = 1; t <= T; ++t)
    for (std::size_t x = 0; x < tokens.size(); ++x) {
      auto& v = values[static_cast<std::size_t>(t - 1)][x];
      if (v.empty()) continue;
      const auto s = summarize_values("wf", v);
      out.push_back({t, tokens[x], static_cast<int>(v.size()), s.mean, s.lo, s.hi});
    }
  return out;
}

// ---- choosing K ----

// Symmetric KL divergence between two distributions of equal length; zero
// entries are lifted to `eps` before renormalizing.
inline double symmetric_kl(std::span<const double> p, std::span<const double> q, double eps = 1e-12) {
  if (p.size() != q.size()) throw Error("distributions differ in length");
  auto lift = [eps](std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    double s = 0.0;
    for (double& v : y) s += (v = std::max(v, eps));
    for (double& v : y) v /= s;
    return y;
  };
  const auto a = lift(p), b = lift(q);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (std::log(a[i]) - std::log(b[i]));
  return d;
}

// Divergence between (1) the normalized, descending singular values of the
// K x |W| topic-token probability matrix and (2) the normalized, descending
// document-length-weighted topic masses, both taken from assignment z over
// the whole corpus. Topic-token rows are beta-smoothed.
inline double arun_criterion(const Corpus& c, std::span<const int> z, int K, double beta) {
  if (K < 2) throw Error("the topic-count criterion needs K >= 2");
  if (c.num_posts() == 0 || c.total_tokens() == 0) throw Error("the topic-count criterion needs a corpus with tokens");
  if (z.size() != static_cast<std::size_t>(c.num_posts())) throw Error("assignment length differs from post count");
  const int W = c.vocab_size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(K, W);
  std::vector<double> mass(static_cast<std::size_t>(K), 0.0);
  for (int d = 0; d < c.num_posts(); ++d) {
    const int k = z[static_cast<std::size_t>(d)];
    if (k < 0 || k >= K) throw Error("assignment out of range for K = " + std::to_string(K));
    const Post& p = c.post(d);
    for (const auto& tc : p.tokens) M(k, tc.token) += tc.count;
    mass[static_cast<std::size_t>(k)] += p.total_tokens;
  }
  for (int k = 0; k < K; ++k) {
    const double denom = mass[static_cast<std::size_t>(k)] + W * beta;
    M.row(k) = (M.row(k).array() + beta) / denom;
  }
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(M).singularValues();
  std::vector<double> cm1(sv.data(), sv.data() + sv.size());
  double s1 = 0.0;
  for (double v : cm1) s1 += v;
  if (!(s1 > 0.0)) throw Error("topic-token matrix is degenerate; check that the corpus has tokens");
  for (double& v : cm1) v /= s1;
  std::sort(cm1.begin(), cm1.end(), std::greater<>());
  double s2 = 0.0;
  for (double v : mass) s2 += v;
  for (double& v : mass) v /= s2;
  std::sort(mass.begin(), mass.end(), std::greater<>());
  return symmetric_kl(cm1, mass);
}

struct KSelection {
  std::vector<int> grid;
  std::vector<double> criterion;
  int best = 0;
};

// Fits the model at each K and returns the criterion of the modal topic
// assignment; `best` is the argmin (lowest K on ties).
inline KSelection select_k(const Corpus& c, const NetworkDesign& design, const ModelConfig& base,
                           std::span<const int> grid) {
  if (grid.size() < 2) throw ConfigError("select-k needs at least two values of K");
  KSelection out;
  for (int K : grid) {
    ModelConfig cfg = base;
    cfg.K = K;
    // per-topic simulation settings do not carry over to another K
    cfg.sim.psi.clear();
    if (cfg.eta.size() > 1) cfg.eta.resize(1);
    const auto pd = run_sampler(c, design, cfg);
    if (pd.empty()) throw ConfigError("select-k run retained no draws");
    out.grid.push_back(K);
    out.criterion.push_back(arun_criterion(c, map_assignments(pd).z, K, cfg.beta));
  }
  out.best = out.grid[static_cast<std::size_t>(std::min_element(out.criterion.begin(), out.criterion.end()) -
                                               out.criterion.begin())];
  return out;
}

}  // namespace dtn
