#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "dtn/preprocess.hpp"
#include "support.hpp"

using namespace dtn;

namespace {

RawPost raw(int day, std::string blog, std::vector<std::string> tokens, std::vector<std::string> links = {}) {
  RawPost p;
  p.day = day;
  p.blog = std::move(blog);
  p.tokens = std::move(tokens);
  p.links = std::move(links);
  return p;
}

// Upper tail summed term by term, from the observed count outwards.
double tail_by_summation(long observed, double mean) {
  double s = 0.0;
  for (long x = observed; x < observed + 2000; ++x) s += std::exp(x * std::log(mean) - mean - std::lgamma(x + 1.0));
  return s;
}

const NgramCandidate* find_candidate(const std::vector<NgramCandidate>& v, const std::string& a, const std::string& b) {
  for (const auto& c : v)
    if (c.first == a && c.second == b) return &c;
  return nullptr;
}

std::vector<RawPost> repeated(const std::vector<std::string>& phrase, int times, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> filler(0, 39);
  std::vector<RawPost> out;
  for (int d = 0; d < times; ++d) {
    RawPost p = raw(1, "b", {});
    for (int n = 0; n < 6; ++n) p.tokens.push_back("f" + std::to_string(filler(rng)));
    p.tokens.insert(p.tokens.end(), phrase.begin(), phrase.end());
    for (int n = 0; n < 6; ++n) p.tokens.push_back("f" + std::to_string(filler(rng)));
    out.push_back(std::move(p));
  }
  return out;
}

long occurrences(const std::vector<RawPost>& posts, const std::string& tok) {
  long n = 0;
  for (const auto& p : posts) n += std::count(p.tokens.begin(), p.tokens.end(), tok);
  return n;
}

}  // namespace

TEST(TokenScores, TfIdf) {
  EXPECT_DOUBLE_EQ(tfidf(3, 2), 1.5);
  EXPECT_DOUBLE_EQ(tfidf(0, 4), 0.0);
  EXPECT_THROW(tfidf(1, 0), Error);
}

TEST(TokenScores, VarianceOverAllPosts) {
  const std::vector<RawPost> posts{raw(1, "x", {"a", "a", "b", "c"}), raw(1, "x", {"a", "c"}), raw(1, "x", {"b", "b", "c"})};
  const auto s = token_stats(posts);
  EXPECT_EQ(s.num_posts, 3);
  // a: n_w = 2, scores 1, 0.5, 0
  EXPECT_NEAR(s.tokens.at("a").variance, 1.0 / 6.0, 1e-15);
  // b: n_w = 2, scores 0.5, 0, 1
  EXPECT_NEAR(s.tokens.at("b").variance, 1.0 / 6.0, 1e-15);
  // c: once in every post
  EXPECT_EQ(s.tokens.at("c").variance, 0.0);
  EXPECT_EQ(s.tokens.at("b").total, 3);
  EXPECT_EQ(s.tokens.at("b").sum_squares, 5);
}

TEST(TokenScores, VarianceAgreesWithTwoPassFormula) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> tok(0, 9), len(1, 12);
  std::vector<RawPost> posts;
  for (int d = 0; d < 200; ++d) {
    RawPost p = raw(1, "x", {});
    for (int n = len(rng); n > 0; --n) p.tokens.push_back("w" + std::to_string(tok(rng)));
    posts.push_back(p);
  }
  const auto s = token_stats(posts);
  for (const auto& [t, st] : s.tokens) {
    std::vector<double> score;
    for (const auto& p : posts) score.push_back(tfidf(std::count(p.tokens.begin(), p.tokens.end(), t), st.doc_freq));
    double mean = 0.0, var = 0.0;
    for (double v : score) mean += v / score.size();
    for (double v : score) var += (v - mean) * (v - mean) / score.size();
    EXPECT_NEAR(st.variance, var, 1e-14) << t;
  }
}

TEST(TokenScores, Filters) {
  TokenStats s;
  s.num_posts = 10000;
  s.tokens["once"].doc_freq = 1;
  s.tokens["twice"].doc_freq = 2;
  s.tokens["often"].doc_freq = 400;
  const auto kept = rare_token_filter(s);
  EXPECT_FALSE(kept.contains("once"));
  EXPECT_TRUE(kept.contains("twice"));
  EXPECT_TRUE(kept.contains("often"));

  s.tokens["once"].variance = 0.0;
  s.tokens["twice"].variance = 0.2;
  s.tokens["often"].variance = 0.1;
  EXPECT_EQ(variance_filter(s), (std::set<std::string>{"often", "twice"}));
  EXPECT_EQ(variance_filter(s, {0.1, std::nullopt}), (std::set<std::string>{"twice"}));
  EXPECT_EQ(variance_filter(s, {0.0, 0.5}), (std::set<std::string>{"often", "twice"}));
}

TEST(Ngrams, PoissonTailMatchesSummation) {
  for (double mean : {0.3, 4.0, 25.0, 200.0})
    for (long obs : {1L, 2L, 5L, 20L, 60L, 250L}) {
      const double want = tail_by_summation(obs, mean);
      EXPECT_NEAR(poisson_upper_tail(obs, mean), want, 1e-10 * std::max(want, 1e-300) + 1e-300) << obs << " " << mean;
    }
  EXPECT_EQ(poisson_upper_tail(0, 3.0), 1.0);
  EXPECT_EQ(poisson_upper_tail(4, 0.0), 0.0);
}

TEST(Ngrams, SignificanceDecreasesWithCount) {
  double last = 1.0;
  for (long obs = 1; obs < 80; ++obs) {
    NgramCandidate c{"a", "b", obs};
    const double p = test_ngram(c, 1000.0, 0.1, 0.2);
    EXPECT_DOUBLE_EQ(c.expected, 20.0);
    EXPECT_LE(p, last);
    last = p;
  }
  NgramCandidate c{"a", "b", 3};
  test_ngram(c, 100.0, 0.0, 0.5);
  EXPECT_TRUE(c.degenerate);
}

TEST(Ngrams, PlantedPairMergedIndependentPairRejected) {
  std::mt19937_64 rng(21);
  auto posts = support::planted_ngram_posts(rng, 600);
  const auto r = mine_ngrams(posts);
  EXPECT_TRUE(r.accepted.contains("white.house"));
  EXPECT_FALSE(r.accepted.contains("alpha.beta"));
  EXPECT_EQ(r.merges, 600);
  EXPECT_EQ(occurrences(posts, "white.house"), 600);
  EXPECT_EQ(occurrences(posts, "white"), 0);
  EXPECT_EQ(r.tokens_after, r.tokens_before - r.merges);
  const auto* ab = find_candidate(r.bigrams, "alpha", "beta");
  ASSERT_NE(ab, nullptr);
  EXPECT_GT(ab->significance, 0.05);
}

TEST(Ngrams, CountFloorRejectsSignificantPair) {
  std::mt19937_64 rng(22);
  auto posts = repeated({"white", "house"}, 499, rng);
  const auto r = mine_ngrams(posts);
  const auto* c = find_candidate(r.bigrams, "white", "house");
  ASSERT_NE(c, nullptr);
  EXPECT_LT(c->significance, 1e-10);
  EXPECT_TRUE(r.accepted.empty());
  EXPECT_EQ(r.merges, 0);
}

TEST(Ngrams, SecondPassBuildsTrigramsAndQuadrigrams) {
  std::mt19937_64 rng(23);
  auto posts = repeated({"new", "york", "city"}, 600, rng);
  auto quad = repeated({"white", "house", "press", "office"}, 550, rng);
  posts.insert(posts.end(), quad.begin(), quad.end());
  const long before = detail::count_tokens(posts);
  const auto r = mine_ngrams(posts);
  EXPECT_TRUE(r.accepted.contains("new.york.city"));
  EXPECT_TRUE(r.accepted.contains("white.house.press.office"));
  EXPECT_EQ(occurrences(posts, "new.york.city"), 600);
  EXPECT_EQ(occurrences(posts, "white.house.press.office"), 550);
  EXPECT_EQ(r.tokens_after, before - r.merges);
  // the higher-order floor is strict
  std::mt19937_64 rng2(24);
  auto few = repeated({"new", "york"}, 500, rng2);
  auto tail = repeated({"new", "york", "city"}, 100, rng2);
  few.insert(few.end(), tail.begin(), tail.end());
  const auto r2 = mine_ngrams(few);
  EXPECT_TRUE(r2.accepted.contains("new.york"));
  EXPECT_FALSE(r2.accepted.contains("new.york.city"));
}

TEST(RawInput, ParsesDatesStemsAndErrors) {
  const auto dir = support::scratch_dir("raw");
  {
    std::ofstream f(dir + "/posts.txt");
    f << "2008-08-03\talice\tRunning Dogs\tbob\n\n2008-08-01\tbob\tcats\t\tp7\n";
  }
  auto lower = [](std::string_view s) {
    std::string o(s);
    for (char& ch : o) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return o;
  };
  const auto posts = load_raw_posts(dir + "/posts.txt", lower);
  ASSERT_EQ(posts.size(), 2u);
  EXPECT_EQ(posts[0].day, 3);
  EXPECT_EQ(posts[1].day, 1);
  EXPECT_EQ(posts[0].tokens, (std::vector<std::string>{"running", "dogs"}));
  EXPECT_EQ(posts[0].links, (std::vector<std::string>{"bob"}));
  EXPECT_EQ(posts[1].id, "p7");

  auto expect_line = [&](const std::string& body, std::size_t line) {
    {
      std::ofstream f(dir + "/bad.txt");
      f << body;
    }
    try {
      load_raw_posts(dir + "/bad.txt");
      ADD_FAILURE() << "no error for " << body;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  };
  expect_line("1\ta\tx\t\n2\ta\tx\n", 2);
  expect_line("1\ta\tx\ta\n", 1);
  expect_line("1\ta\tx\t\nyesterday\tb\ty\t\n", 2);
  expect_line("1\ta\tx\t\n0\tb\ty\t\n", 2);
  EXPECT_THROW(load_raw_posts(dir + "/missing.txt"), IoError);
}

TEST(Pipeline, BuildsCorpusWithLinkTargetsAsBlogs) {
  const std::vector<RawPost> posts{raw(2, "a", {"x", "y", "x"}, {"c"}), raw(1, "b", {"y"})};
  const auto c = build_corpus(posts);
  EXPECT_EQ(c.blog_names(), (std::vector<std::string>{"a", "c", "b"}));
  EXPECT_EQ(c.horizon(), 2);
  EXPECT_EQ(c.post(0).total_tokens, 3);
  EXPECT_EQ(c.post(0).out_links, (std::vector<int>{1}));
  EXPECT_EQ(c.total_tokens(), 4);
}

TEST(Pipeline, FiltersThenMines) {
  std::mt19937_64 rng(25);
  auto posts = support::planted_ngram_posts(rng, 600);
  for (auto& p : posts) p.tokens.push_back("everywhere");  // same score in every post
  // a second "white house" in some posts so the pair is not constant too;
  // alpha and beta stay constant and are filtered
  for (int d = 0; d < 100; ++d) posts[d].tokens.insert(posts[d].tokens.end(), {"white", "house"});
  posts[0].tokens.push_back("hapax");
  PreprocessOptions opt;
  opt.min_doc_fraction = 0.002;
  const auto r = preprocess(posts, opt);
  EXPECT_FALSE(r.corpus.vocabulary().find("everywhere"));
  EXPECT_FALSE(r.corpus.vocabulary().find("hapax"));
  EXPECT_TRUE(r.corpus.vocabulary().find("white.house"));
  EXPECT_EQ(r.dropped_by_variance, 3);
  EXPECT_EQ(r.dropped_as_rare, 1);
  EXPECT_FALSE(r.corpus.vocabulary().find("alpha"));
  EXPECT_EQ(r.ngrams.merges, 700);
  EXPECT_EQ(r.corpus.total_tokens(), r.ngrams.tokens_after);
}
