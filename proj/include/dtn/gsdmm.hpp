#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "dtn/corpus.hpp"
#include "dtn/random.hpp"
#include "dtn/window_counts.hpp"

namespace dtn {

// xi_kit = lambda_kit / sum_k lambda_kit. Returns false (and fills a uniform
// vector) when every rate is zero.
inline bool augmentation_weights(std::span<const double> rates, std::span<double> xi) {
  double total = 0.0;
  for (double r : rates) total += r;
  if (!(total > 0.0)) {
    for (double& v : xi) v = 1.0 / static_cast<double>(xi.size());
    return false;
  }
  for (std::size_t k = 0; k < rates.size(); ++k) xi[k] = rates[k] / total;
  return true;
}

inline std::vector<double> augmentation_weights(std::span<const double> rates) {
  std::vector<double> xi(rates.size());
  augmentation_weights(rates, xi);
  return xi;
}

struct GsdmmPriors {
  double alpha = 0.1;
  double beta = 0.1;
};

// Log of the windowed GSDMM score for assigning post d to topic k. `counts`
// must exclude d; `window_posts` is |D_{t-ell:t}| including d.
inline double gsdmm_log_text_prob(const Post& d, int k, const WindowCounts& counts, const GsdmmPriors& pr,
                                  int window_posts) {
  const int K = counts.num_topics();
  const double W = static_cast<double>(counts.vocab_size());
  const int m = counts.posts(k);
  const long n = counts.tokens(k);
  if (m < 0 || n < 0) throw AuditError("negative window count for topic " + std::to_string(k));
  double lp = std::log(m + pr.alpha) - std::log(window_posts - 1 + K * pr.alpha);
  for (const auto& tc : d.tokens) {
    const int nw = counts.token(k, tc.token);
    if (nw < 0) throw AuditError("negative token count for topic " + std::to_string(k));
    lp += log_rising(nw + pr.beta, tc.count);
  }
  lp -= log_rising(static_cast<double>(n) + W * pr.beta, d.total_tokens);
  return lp;
}

// Normalized product of the windowed GSDMM scores and xi. `out` has K entries.
inline void topic_probabilities(const Post& d, const WindowCounts& counts, std::span<const double> xi,
                                const GsdmmPriors& pr, std::span<double> out) {
  const int K = counts.num_topics();
  const int window_posts = counts.window_posts() + 1;
  for (int k = 0; k < K; ++k) {
    const double x = xi[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] =
        x > 0.0 ? gsdmm_log_text_prob(d, k, counts, pr, window_posts) + std::log(x) : kNegInf;
  }
  normalize_log_weights(out);
}

inline std::vector<double> topic_probabilities(const Post& d, const WindowCounts& counts, std::span<const double> xi,
                                               const GsdmmPriors& pr) {
  std::vector<double> out(static_cast<std::size_t>(counts.num_topics()));
  topic_probabilities(d, counts, xi, pr, out);
  return out;
}

// Same scores as topic_probabilities, with log(n + beta) and log(n + |W| beta)
// looked up from tables sized to the corpus token mass.
class GsdmmScorer {
 public:
  GsdmmScorer() = default;
  GsdmmScorer(const GsdmmPriors& pr, int num_topics, int vocab_size, long max_tokens)
      : pr_(pr), K_(num_topics), log_beta_(static_cast<std::size_t>(max_tokens) + 1),
        log_wbeta_(static_cast<std::size_t>(max_tokens) + 1) {
    const double wb = vocab_size * pr.beta;
    for (std::size_t n = 0; n < log_beta_.size(); ++n) {
      log_beta_[n] = std::log(static_cast<double>(n) + pr.beta);
      log_wbeta_[n] = std::log(static_cast<double>(n) + wb);
    }
  }

  void operator()(const Post& d, const WindowCounts& counts, std::span<const double> xi, std::span<double> out) const {
    const int window_posts = counts.window_posts() + 1;
    const double denom = std::log(window_posts - 1 + K_ * pr_.alpha);
    for (int k = 0; k < K_; ++k) {
      const double x = xi[static_cast<std::size_t>(k)];
      if (!(x > 0.0)) {
        out[static_cast<std::size_t>(k)] = kNegInf;
        continue;
      }
      const int m = counts.posts(k);
      const long n = counts.tokens(k);
      if (m < 0 || n < 0) throw AuditError("negative window count for topic " + std::to_string(k));
      double lp = std::log(m + pr_.alpha) - denom + std::log(x);
      const auto row = counts.token_row(k);
      for (const auto& tc : d.tokens) {
        const double* lb = &log_beta_[static_cast<std::size_t>(row[static_cast<std::size_t>(tc.token)])];
        for (int s = 0; s < tc.count; ++s) lp += lb[s];
      }
      const double* lw = &log_wbeta_[static_cast<std::size_t>(n)];
      for (int s = 0; s < d.total_tokens; ++s) lp -= lw[s];
      out[static_cast<std::size_t>(k)] = lp;
    }
    normalize_log_weights(out);
  }

 private:
  GsdmmPriors pr_;
  int K_ = 0;
  std::vector<double> log_beta_, log_wbeta_;
};

}  // namespace dtn
