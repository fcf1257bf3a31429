#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace dtn {

using Rng = std::mt19937_64;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Independent stream for a chain / blog, derived deterministically from a seed.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double draw_normal(Rng& rng, double mean, double sd) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

// Gamma with shape/rate parameterization.
inline double draw_gamma(Rng& rng, double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

inline int draw_poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

inline bool draw_bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

// Normal(mean, sd) truncated to (0, inf).
inline double draw_truncated_normal_positive(Rng& rng, double mean, double sd) {
  const double lower = -mean / sd;  // standardized truncation point
  if (lower < 1.0) {
    for (;;) {
      const double x = draw_normal(rng, mean, sd);
      if (x > 0.0) return x;
    }
  }
  // Exponential rejection sampler for the far tail.
  const double a = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower - std::log(uniform01(rng)) / a;
    const double u = uniform01(rng);
    if (u <= std::exp(-0.5 * (z - a) * (z - a))) {
      const double x = mean + sd * z;
      if (x > 0.0) return x;
    }
  }
}

// Normalized gamma draws. Concentrations and raw draws are floored so a
// degenerate concentration still yields a proper simplex point.
inline std::vector<double> draw_dirichlet(Rng& rng, std::span<const double> alpha,
                                          double floor = 1e-12) {
  std::vector<double> x(alpha.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    x[k] = std::max(draw_gamma(rng, std::max(alpha[k], floor), 1.0), floor);
    sum += x[k];
  }
  for (double& v : x) v /= sum;
  return x;
}

// Sample an index with probability proportional to weights (need not sum to 1).
inline int draw_categorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    u -= weights[k];
    if (u < 0.0) return static_cast<int>(k);
  }
  // Rounding left u marginally positive; return the last positive weight.
  for (std::size_t k = weights.size(); k-- > 0;)
    if (weights[k] > 0.0) return static_cast<int>(k);
  return 0;
}

// Normalize log weights in place into probabilities.
inline void normalize_log_weights(std::span<double> logw) {
  const double mx = *std::max_element(logw.begin(), logw.end());
  double sum = 0.0;
  for (double& v : logw) {
    v = (mx == kNegInf) ? 1.0 : std::exp(v - mx);
    sum += v;
  }
  for (double& v : logw) v /= sum;
}

inline double log_poisson_pmf(long k, double mean) {
  if (mean <= 0.0) return k == 0 ? 0.0 : kNegInf;
  return static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0);
}

inline double log_dirichlet_pdf(std::span<const double> x, std::span<const double> alpha) {
  double a0 = 0.0, out = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    a0 += alpha[k];
    out += (alpha[k] - 1.0) * std::log(x[k]) - std::lgamma(alpha[k]);
  }
  return out + std::lgamma(a0);
}

// log Phi(x) for the standard normal.
inline double log_normal_cdf(double x) { return std::log(0.5 * std::erfc(-x / std::sqrt(2.0))); }

// Log density of Normal(mean, sd) truncated to (0, inf), evaluated at x > 0.
inline double log_truncated_normal_pdf(double x, double mean, double sd) {
  if (x <= 0.0) return kNegInf;
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI) - log_normal_cdf(mean / sd);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// sum_{s=1}^{n} log(x + s - 1), i.e. the log rising factorial.
inline double log_rising(double x, long n) {
  if (n <= 0) return 0.0;
  if (n <= 4) {
    double p = x;
    for (long s = 1; s < n; ++s) p *= (x + static_cast<double>(s));
    return std::log(p);
  }
  return std::lgamma(x + static_cast<double>(n)) - std::lgamma(x);
}

}  // namespace dtn
