#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "dtn/corpus.hpp"
#include "dtn/window_counts.hpp"

namespace oracle {

// Dirichlet-multinomial predictive evaluated as a Polya urn in plain
// arithmetic, with counts taken straight from z over days t-ell..t.
inline std::vector<double> urn_oracle(const dtn::Corpus& c, const std::vector<int>& z, int d, int K, int ell,
                                      const std::vector<double>& xi, double alpha, double beta) {
  const dtn::Post& post = c.post(d);
  const int t = post.day, W = c.vocab_size();
  std::vector<double> m(K, 0.0), n(K, 0.0);
  std::vector<std::vector<double>> nw(K, std::vector<double>(W, 0.0));
  double window = 1.0;  // post d itself
  for (int e = 0; e < c.num_posts(); ++e) {
    const dtn::Post& q = c.post(e);
    if (e == d || q.day < std::max(1, t - ell) || q.day > t) continue;
    window += 1.0;
    if (z[e] < 0) continue;
    m[z[e]] += 1.0;
    for (auto& tc : q.tokens) {
      nw[z[e]][tc.token] += tc.count;
      n[z[e]] += tc.count;
    }
  }
  std::vector<double> p(K);
  for (int k = 0; k < K; ++k) {
    double v = (m[k] + alpha) / (window - 1.0 + K * alpha);
    double seen = 0.0;
    for (auto& tc : post.tokens)
      for (int j = 0; j < tc.count; ++j) {
        v *= (nw[k][tc.token] + beta + j) / (n[k] + W * beta + seen);
        seen += 1.0;
      }
    p[k] = v * xi[k];
  }
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= s;
  return p;
}

// Window counts for post d's day with d itself left out.
inline dtn::WindowCounts counts_without(const dtn::Corpus& c, std::vector<int> z, int d, int K, int ell) {
  z[d] = -1;
  return dtn::recount_window(c, z, K, ell, c.post(d).day);
}

}  // namespace oracle
