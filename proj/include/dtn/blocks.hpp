#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dtn/error.hpp"

namespace dtn {

// Topic-interest blocks: every 1-, 2- and 3-subset of the K topics followed
// by the all-topics block. Column b of the interest matrix I is `topics(b)`.
class BlockCatalog {
 public:
  explicit BlockCatalog(int K) : K_(K) {
    if (K < 1) throw ConfigError("K must be at least 1");
    for (int a = 0; a < K; ++a) push({a});
    for (int a = 0; a < K; ++a)
      for (int b = a + 1; b < K; ++b) push({a, b});
    for (int a = 0; a < K; ++a)
      for (int b = a + 1; b < K; ++b)
        for (int c = b + 1; c < K; ++c) push({a, b, c});
    // For K <= 3 the full set already appeared as a subset.
    if (K > 3) {
      std::vector<int> all(static_cast<std::size_t>(K));
      for (int k = 0; k < K; ++k) all[static_cast<std::size_t>(k)] = k;
      push(std::move(all));
    }
    all_topics_ = size() - 1;
  }

  int num_topics() const noexcept { return K_; }
  int size() const noexcept { return static_cast<int>(sets_.size()); }
  std::span<const int> topics(int b) const { return sets_[static_cast<std::size_t>(b)]; }
  bool interested(int b, int k) const {
    return mask_[static_cast<std::size_t>(b) * K_ + static_cast<std::size_t>(k)] != 0;
  }
  int all_topics_block() const noexcept { return all_topics_; }

  // Dirichlet parameter for a blog in block b: P on interest topics, 1 elsewhere.
  std::vector<double> dirichlet_params(int b, double P) const {
    std::vector<double> a(static_cast<std::size_t>(K_), 1.0);
    for (int k : topics(b)) a[static_cast<std::size_t>(k)] = P;
    return a;
  }

 private:
  void push(std::vector<int> s) {
    for (int k = 0; k < K_; ++k) mask_.push_back(0);
    for (int k : s) mask_[mask_.size() - static_cast<std::size_t>(K_) + static_cast<std::size_t>(k)] = 1;
    sets_.push_back(std::move(s));
  }

  int K_;
  int all_topics_ = 0;
  std::vector<std::vector<int>> sets_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace dtn
