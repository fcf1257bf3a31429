#include <gtest/gtest.h>

#include <random>

#include "dtn/window_counts.hpp"
#include "support.hpp"

using namespace dtn;

// Random single-post assign/unassign moves plus window advances, checked
// against a recount from z.
TEST(WindowCounts, RandomOperationsMatchRecount) {
  std::mt19937_64 rng(21);
  const int K = 4, ell = 3, T = 12;
  const Corpus c = support::random_corpus(rng, 6, T, 25, 300, 12);
  std::vector<int> z(c.num_posts(), -1);
  WindowCounts wc(K, c.vocab_size(), ell);
  int t = 1;
  wc.advance(c, z, t);
  for (int op = 0; op < 10000; ++op) {
    if (rng() % 50 == 0) {
      if (t == T) {
        wc.reset();
        t = 1;
      } else {
        ++t;
      }
      wc.advance(c, z, t);
    }
    std::vector<int> live;
    for (int u = wc.first_day(); u <= t; ++u)
      for (int d : c.posts_on_day(u)) live.push_back(d);
    if (live.empty()) continue;
    const int d = live[rng() % live.size()];
    if (z[d] >= 0) {
      wc.remove(c.post(d), z[d]);
      z[d] = -1;
    } else {
      z[d] = static_cast<int>(rng() % K);
      wc.add(c.post(d), z[d]);
    }
    if (op % 997 == 0) ASSERT_EQ(wc, recount_window(c, z, K, ell, t)) << "op " << op;
  }
  EXPECT_EQ(wc, recount_window(c, z, K, ell, t));
  EXPECT_NO_THROW(audit_window(wc, c, z));
}

TEST(WindowCounts, AdvanceDropsOldDays) {
  std::mt19937_64 rng(1);
  const Corpus c = support::random_corpus(rng, 3, 10, 8, 80, 6);
  std::vector<int> z(c.num_posts());
  for (int& v : z) v = static_cast<int>(rng() % 3);
  WindowCounts wc(3, c.vocab_size(), 2);
  for (int t = 1; t <= 10; ++t) {
    wc.advance(c, z, t);
    EXPECT_EQ(wc, recount_window(c, z, 3, 2, t));
    int posts = 0;
    for (int u = std::max(1, t - 2); u <= t; ++u) posts += static_cast<int>(c.posts_on_day(u).size());
    EXPECT_EQ(wc.window_posts(), posts);
  }
  // jumping several days at once
  WindowCounts jump(3, c.vocab_size(), 2);
  jump.advance(c, z, 2);
  jump.advance(c, z, 9);
  EXPECT_EQ(jump, recount_window(c, z, 3, 2, 9));
}

TEST(WindowCounts, AuditReportsDivergence) {
  std::mt19937_64 rng(2);
  const Corpus c = support::random_corpus(rng, 2, 4, 5, 20, 4);
  std::vector<int> z(c.num_posts(), 0);
  WindowCounts wc(2, c.vocab_size(), 1);
  wc.advance(c, z, 3);
  int d = 0;
  while (c.post(d).day < 2 || c.post(d).day > 3) ++d;
  z[d] = 1;  // z changes behind the counts' back
  EXPECT_THROW(audit_window(wc, c, z), AuditError);
}
