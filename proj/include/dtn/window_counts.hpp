#pragma once

#include <span>
#include <string>
#include <vector>

#include "dtn/corpus.hpp"
#include "dtn/error.hpp"

namespace dtn {

// Sliding-window count tables for the topic sampler. For the cursor day t the
// tables hold, per topic k, the assigned posts m*_k, token counts N*w_k and
// total tokens N*_k over days t-ell..t. Posts with topic < 0 are unassigned
// and never counted.
class WindowCounts {
 public:
  WindowCounts() = default;
  WindowCounts(int K, int vocab_size, int ell)
      : K_(K), W_(vocab_size), ell_(ell), posts_(static_cast<std::size_t>(K), 0),
        tokens_(static_cast<std::size_t>(K), 0), token_(static_cast<std::size_t>(K) * vocab_size, 0) {}

  int num_topics() const noexcept { return K_; }
  int vocab_size() const noexcept { return W_; }
  int ell() const noexcept { return ell_; }
  int cursor() const noexcept { return cursor_; }
  int first_day() const noexcept { return std::max(1, cursor_ - ell_); }
  bool in_window(int day) const noexcept { return cursor_ > 0 && day >= first_day() && day <= cursor_; }

  int posts(int k) const { return posts_[static_cast<std::size_t>(k)]; }
  long tokens(int k) const { return tokens_[static_cast<std::size_t>(k)]; }
  int token(int k, int w) const { return token_[static_cast<std::size_t>(k) * W_ + static_cast<std::size_t>(w)]; }
  std::span<const int> token_row(int k) const {
    return {token_.data() + static_cast<std::size_t>(k) * W_, static_cast<std::size_t>(W_)};
  }
  int window_posts() const noexcept { return window_posts_; }

  void add(const Post& p, int k) { apply(p, k, +1); }
  void remove(const Post& p, int k) { apply(p, k, -1); }

  void reset() {
    cursor_ = 0;
    window_posts_ = 0;
    std::fill(posts_.begin(), posts_.end(), 0);
    std::fill(tokens_.begin(), tokens_.end(), 0L);
    std::fill(token_.begin(), token_.end(), 0);
  }

  // Moves the window to day t (> cursor), dropping days that fall out and
  // adding the posts of newly covered days under their current topics.
  void advance(const Corpus& c, std::span<const int> z, int t) {
    const int old_first = first_day(), old_cursor = cursor_;
    const int new_first = std::max(1, t - ell_);
    if (old_cursor > 0)
      for (int u = old_first; u <= std::min(old_cursor, new_first - 1); ++u) apply_day(c, z, u, -1);
    for (int u = std::max(new_first, old_cursor + 1); u <= t; ++u) apply_day(c, z, u, +1);
    cursor_ = t;
  }

  friend bool operator==(const WindowCounts&, const WindowCounts&) = default;

 private:
  void apply_day(const Corpus& c, std::span<const int> z, int day, int sign) {
    for (int d : c.posts_on_day(day)) {
      const int k = z[static_cast<std::size_t>(d)];
      if (k >= 0) apply(c.post(d), k, sign);
    }
  }

  void apply(const Post& p, int k, int sign) {
    posts_[static_cast<std::size_t>(k)] += sign;
    window_posts_ += sign;
    tokens_[static_cast<std::size_t>(k)] += sign * p.total_tokens;
    int* row = token_.data() + static_cast<std::size_t>(k) * W_;
    for (const auto& tc : p.tokens) row[tc.token] += sign * tc.count;
  }

  int K_ = 0, W_ = 0, ell_ = 1;
  int cursor_ = 0;
  int window_posts_ = 0;
  std::vector<int> posts_;
  std::vector<long> tokens_;
  std::vector<int> token_;
};

// From-scratch tables for the window ending at day t.
inline WindowCounts recount_window(const Corpus& c, std::span<const int> z, int K, int ell, int t) {
  WindowCounts w(K, c.vocab_size(), ell);
  w.advance(c, z, t);
  return w;
}

// Throws AuditError with a short dump when `counts` differs from a recount.
inline void audit_window(const WindowCounts& counts, const Corpus& c, std::span<const int> z) {
  if (counts.cursor() == 0) return;
  const WindowCounts fresh = recount_window(c, z, counts.num_topics(), counts.ell(), counts.cursor());
  if (fresh == counts) return;
  std::string dump = "window counts diverged from recount at day " + std::to_string(counts.cursor()) + ":";
  for (int k = 0; k < counts.num_topics(); ++k)
    dump += " k" + std::to_string(k) + " posts " + std::to_string(counts.posts(k)) + "/" +
            std::to_string(fresh.posts(k)) + " tokens " + std::to_string(counts.tokens(k)) + "/" +
            std::to_string(fresh.tokens(k)) + ";";
  throw AuditError(dump);
}

}  // namespace dtn
