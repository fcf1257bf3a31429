#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "dtn/config.hpp"
#include "dtn/corpus.hpp"
#include "dtn/random.hpp"

namespace dtn {

// S_ii't = (1, B(i,i'), L_i'it, I_i't, O_it).
using Covariates = std::array<double, kNumCovariates>;

inline constexpr int kLagDays = 7;

inline double linear_predictor(const Theta& theta, const Covariates& s) {
  double eta = 0.0;
  for (int p = 0; p < kNumCovariates; ++p) eta += theta[static_cast<std::size_t>(p)] * s[static_cast<std::size_t>(p)];
  return eta;
}

// Logistic link, evaluated without overflow for either sign of the predictor.
inline double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

inline double link_probability(const Theta& theta, const Covariates& s) { return logistic(linear_predictor(theta, s)); }

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline bool sample_link(double p, Rng& rng) { return draw_bernoulli(rng, p); }

// Bernoulli log-likelihood of one link indicator under predictor eta.
inline double link_loglik(bool a, double eta) { return (a ? eta : 0.0) - softplus(eta); }

// 1 when both blogs share a block, otherwise the dot product of their interests.
inline double block_similarity(int block_i, int block_j, std::span<const double> pi_i, std::span<const double> pi_j) {
  if (block_i == block_j) return 1.0;
  double dot = 0.0;
  for (std::size_t k = 0; k < pi_i.size(); ++k) dot += pi_i[k] * pi_j[k];
  return dot;
}

// Covariates computed directly from the link history A_1..A_{t-1}.
inline Covariates covariates(int i, int j, int t, const AdjacencyTensor& A, double similarity) {
  Covariates s{1.0, similarity, 0.0, 0.0, 0.0};
  for (int u = std::max(1, t - kLagDays); u < t; ++u)
    if (A.at(u, j, i)) s[2] = 1.0;
  if (t > 1) {
    long in = 0, out = 0;
    for (int u = 1; u < t; ++u)
      for (int v = 0; v < A.num_nodes(); ++v) {
        in += A.at(u, v, j);
        out += A.at(u, i, v);
      }
    s[3] = static_cast<double>(in) / (t - 1);
    s[4] = static_cast<double>(out) / (t - 1);
  }
  return s;
}

// Running link statistics, fed one day at a time; covariates for day t use
// only the days recorded before it.
class LinkHistory {
 public:
  explicit LinkHistory(int num_nodes)
      : n_(num_nodes), in_(static_cast<std::size_t>(num_nodes), 0), out_(static_cast<std::size_t>(num_nodes), 0),
        last_(static_cast<std::size_t>(num_nodes) * num_nodes, 0) {}

  int days_recorded() const noexcept { return days_; }

  double mean_indegree(int j) const {
    return days_ > 0 ? static_cast<double>(in_[static_cast<std::size_t>(j)]) / days_ : 0.0;
  }
  double mean_outdegree(int i) const {
    return days_ > 0 ? static_cast<double>(out_[static_cast<std::size_t>(i)]) / days_ : 0.0;
  }
  // Whether `from` linked to `to` within the lag window before the next day.
  bool recent(int from, int to) const {
    const int last = last_[static_cast<std::size_t>(from) * n_ + static_cast<std::size_t>(to)];
    return last > 0 && last >= days_ + 1 - kLagDays;
  }

  Covariates covariates(int i, int j, double similarity) const {
    return {1.0, similarity, recent(j, i) ? 1.0 : 0.0, mean_indegree(j), mean_outdegree(i)};
  }

  // Appends the next day's links (i -> j pairs).
  void record_day(std::span<const std::pair<int, int>> links) {
    ++days_;
    for (auto [i, j] : links) {
      ++out_[static_cast<std::size_t>(i)];
      ++in_[static_cast<std::size_t>(j)];
      last_[static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)] = days_;
    }
  }

 private:
  int n_;
  int days_ = 0;
  std::vector<long> in_, out_;
  std::vector<int> last_;  // last day with an i -> j link, 0 if none
};

// Observed links with the history-only covariates (lag, mean degrees)
// precomputed for every (t, i, j). The block-similarity term is supplied per
// evaluation because it moves with the block assignments.
class NetworkDesign {
 public:
  NetworkDesign() = default;

  explicit NetworkDesign(const AdjacencyTensor& A)
      : n_(A.num_nodes()), T_(A.horizon()),
        link_(static_cast<std::size_t>(T_) * n_ * n_, 0), lag_(link_.size(), 0),
        in_(static_cast<std::size_t>(T_) * n_, 0.0), out_(in_.size(), 0.0) {
    LinkHistory hist(n_);
    std::vector<std::pair<int, int>> today;
    std::size_t e = 0;
    const auto& edges = A.edges();
    for (int t = 1; t <= T_; ++t) {
      for (int i = 0; i < n_; ++i) {
        in_[node(t, i)] = hist.mean_indegree(i);
        out_[node(t, i)] = hist.mean_outdegree(i);
        for (int j = 0; j < n_; ++j)
          if (i != j) lag_[cell(t, i, j)] = hist.recent(j, i);
      }
      today.clear();
      while (e < edges.size() && edges[e].day == t) {
        link_[cell(t, edges[e].from, edges[e].to)] = 1;
        today.emplace_back(edges[e].from, edges[e].to);
        ++e;
      }
      hist.record_day(today);
    }
  }

  int num_nodes() const noexcept { return n_; }
  int horizon() const noexcept { return T_; }
  bool link(int t, int i, int j) const { return link_[cell(t, i, j)] != 0; }
  bool lag(int t, int i, int j) const { return lag_[cell(t, i, j)] != 0; }
  double indegree(int t, int j) const { return in_[node(t, j)]; }
  double outdegree(int t, int i) const { return out_[node(t, i)]; }

  Covariates covariates(int t, int i, int j, double similarity) const {
    return {1.0, similarity, lag(t, i, j) ? 1.0 : 0.0, indegree(t, j), outdegree(t, i)};
  }

  // Full product-Bernoulli log-likelihood over i != j and all days.
  // `similarity` is the row-major n x n matrix of B(i, j).
  double loglik(const Theta& th, std::span<const double> similarity) const {
    double ll = 0.0;
    for (int t = 1; t <= T_; ++t) {
      const double* in = &in_[node(t, 0)];
      const double* out = &out_[node(t, 0)];
      for (int i = 0; i < n_; ++i) {
        const double base_i = th[0] + th[4] * out[i];
        const std::size_t row = cell(t, i, 0);
        const double* sim = &similarity[static_cast<std::size_t>(i) * n_];
        for (int j = 0; j < n_; ++j) {
          if (i == j) continue;
          const double eta = base_i + th[1] * sim[j] + th[2] * lag_[row + j] + th[3] * in[j];
          ll += link_loglik(link_[row + j] != 0, eta);
        }
      }
    }
    return ll;
  }

  // Log-likelihood of the i -> j link indicators over all days under a given similarity.
  double pair_loglik(int i, int j, const Theta& th, double similarity) const {
    double ll = 0.0;
    for (int t = 1; t <= T_; ++t) {
      const std::size_t c = cell(t, i, j);
      const double eta = th[0] + th[1] * similarity + th[2] * lag_[c] + th[3] * in_[node(t, j)] + th[4] * out_[node(t, i)];
      ll += link_loglik(link_[c] != 0, eta);
    }
    return ll;
  }

 private:
  std::size_t cell(int t, int i, int j) const {
    return (static_cast<std::size_t>(t - 1) * n_ + static_cast<std::size_t>(i)) * n_ + static_cast<std::size_t>(j);
  }
  std::size_t node(int t, int i) const { return static_cast<std::size_t>(t - 1) * n_ + static_cast<std::size_t>(i); }

  int n_ = 0;
  int T_ = 0;
  std::vector<std::uint8_t> link_, lag_;
  std::vector<double> in_, out_;
};

}  // namespace dtn
