#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "dtn/corpus.hpp"
#include "dtn/error.hpp"
#include "dtn/text.hpp"

namespace dtn {

// A post before counting: the token sequence matters for n-gram adjacency.
struct RawPost {
  int day = 1;
  std::string blog;
  std::vector<std::string> tokens;
  std::vector<std::string> links;
  std::string id;
};

using Stemmer = std::function<std::string(std::string_view)>;

inline std::string identity_stem(std::string_view s) { return std::string(s); }

// Raw file: `day<TAB>blog<TAB>space-separated tokens<TAB>links[<TAB>post_id]`.
inline std::vector<RawPost> load_raw_posts(const std::string& path, const Stemmer& stem = identity_stem) {
  auto in = text::open_input(path);
  std::vector<RawPost> posts;
  std::vector<detail::DayField> days;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    std::string_view sv = line;
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty()) continue;
    auto f = text::split(sv, '\t');
    if (f.size() != 4 && f.size() != 5) throw ParseError("expected 4 or 5 tab-separated fields", ln);
    days.push_back(detail::parse_day(text::trim(f[0]), ln));
    RawPost p;
    p.blog = std::string(text::trim(f[1]));
    if (p.blog.empty()) throw ParseError("empty blog id", ln);
    for (auto tok : text::split(f[2], ' ')) {
      tok = text::trim(tok);
      if (tok.empty()) continue;
      auto s = stem(tok);
      if (!s.empty()) p.tokens.push_back(std::move(s));
    }
    for (auto l : text::split(f[3], ',')) {
      l = text::trim(l);
      if (l.empty()) continue;
      if (l == p.blog) throw ParseError("self-link", ln);
      p.links.emplace_back(l);
    }
    if (f.size() == 5) p.id = std::string(text::trim(f[4]));
    posts.push_back(std::move(p));
    lines.push_back(ln);
  }
  const auto resolved = detail::resolve_days(days);
  for (std::size_t r = 0; r < posts.size(); ++r) {
    if (resolved[r] < 1) throw ParseError("day out of range", lines[r]);
    posts[r].day = static_cast<int>(resolved[r]);
  }
  return posts;
}

// ---- TF-IDF and token filters ----

inline double tfidf(long f_wd, long n_w) {
  if (n_w <= 0) throw Error("tf-idf is undefined for a token that occurs in no post");
  return static_cast<double>(f_wd) / static_cast<double>(n_w);
}

struct TokenStat {
  long doc_freq = 0;      // n_w
  long total = 0;         // sum_d f_wd
  long sum_squares = 0;   // sum_d f_wd^2
  double variance = 0.0;  // population variance of f_wd / n_w over all posts
};

struct TokenStats {
  long num_posts = 0;
  std::map<std::string, TokenStat> tokens;
};

// The variance is assembled from exact integer sums, so a token with the
// same score in every post has variance exactly 0.
inline TokenStats token_stats(const std::vector<RawPost>& posts) {
  TokenStats s;
  s.num_posts = static_cast<long>(posts.size());
  std::map<std::string, long> f;
  for (const auto& p : posts) {
    f.clear();
    for (const auto& t : p.tokens) ++f[t];
    for (const auto& [t, n] : f) {
      auto& st = s.tokens[t];
      ++st.doc_freq;
      st.total += n;
      st.sum_squares += n * n;
    }
  }
  const auto D = static_cast<__int128>(s.num_posts);
  for (auto& [_, st] : s.tokens) {
    // Var = (D * sum f^2 - (sum f)^2) / (n_w^2 D^2)
    const __int128 num = D * st.sum_squares - static_cast<__int128>(st.total) * st.total;
    const double nw = static_cast<double>(st.doc_freq);
    st.variance = static_cast<double>(num) / (nw * nw * static_cast<double>(D) * static_cast<double>(D));
  }
  return s;
}

struct VarianceFilter {
  double threshold = 0.0;               // keep variance > threshold
  std::optional<double> keep_fraction;  // or keep this top share of tokens
};

inline std::set<std::string> variance_filter(const TokenStats& stats, const VarianceFilter& mode = {}) {
  std::set<std::string> keep;
  if (mode.keep_fraction) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [t, st] : stats.tokens) ranked.emplace_back(st.variance, t);
    std::stable_sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) { return a.first > b.first; });
    const auto n = static_cast<std::size_t>(std::ceil(*mode.keep_fraction * static_cast<double>(ranked.size())));
    for (std::size_t r = 0; r < std::min(n, ranked.size()); ++r) keep.insert(ranked[r].second);
    return keep;
  }
  for (const auto& [t, st] : stats.tokens)
    if (st.variance > mode.threshold) keep.insert(t);
  return keep;
}

// Tokens used in at least `min_doc_fraction` of the posts (strictly rarer ones go).
inline std::set<std::string> rare_token_filter(const TokenStats& stats, double min_doc_fraction = 0.0002) {
  std::set<std::string> keep;
  if (stats.num_posts == 0) return keep;
  for (const auto& [t, st] : stats.tokens)
    if (!(static_cast<double>(st.doc_freq) / static_cast<double>(stats.num_posts) < min_doc_fraction)) keep.insert(t);
  return keep;
}

inline void retain_tokens(std::vector<RawPost>& posts, const std::set<std::string>& keep) {
  for (auto& p : posts)
    std::erase_if(p.tokens, [&](const std::string& t) { return !keep.contains(t); });
}

// ---- n-grams ----

struct NgramCandidate {
  std::string first, second;  // the two parts, each a unigram or an accepted bigram
  long observed = 0;
  double expected = 0.0;
  double significance = 1.0;
  bool degenerate = false;  // positive count against a zero expectation
};

// P(X >= observed) for X ~ Poisson(expected).
inline double poisson_upper_tail(long observed, double expected) {
  if (observed <= 0) return 1.0;
  if (!(expected > 0.0)) return 0.0;
  return boost::math::gamma_p(static_cast<double>(observed), expected);
}

// Fills expected = N p_a p_b and the upper-tail significance probability.
inline double test_ngram(NgramCandidate& c, double N, double p_a, double p_b) {
  if (!(N > 0.0)) throw Error("n-gram test needs a positive token total");
  c.expected = N * p_a * p_b;
  c.degenerate = c.observed > 0 && !(c.expected > 0.0);
  c.significance = poisson_upper_tail(c.observed, c.expected);
  return c.significance;
}

inline std::string join_ngram(const std::string& a, const std::string& b) { return a + "." + b; }

struct NgramOptions {
  double alpha = 0.05;
  long bigram_min = 500;
  long higher_min = 100;
};

struct NgramResult {
  std::vector<NgramCandidate> bigrams;  // every tested pass-1 pair
  std::vector<NgramCandidate> higher;   // every pass-2 candidate
  std::set<std::string> accepted;       // merged token strings, both passes
  long merges = 0;
  long tokens_before = 0, tokens_after = 0;
  long warnings = 0;
};

namespace detail {

using PairCounts = std::map<std::pair<std::string, std::string>, long>;

inline PairCounts adjacent_pairs(const std::vector<RawPost>& posts, const std::function<bool(const std::string&, const std::string&)>& eligible) {
  PairCounts pc;
  for (const auto& p : posts)
    for (std::size_t i = 0; i + 1 < p.tokens.size(); ++i)
      if (eligible(p.tokens[i], p.tokens[i + 1])) ++pc[{p.tokens[i], p.tokens[i + 1]}];
  return pc;
}

// Greedy left-to-right merge of accepted pairs; returns the merge count.
inline long merge_pairs(std::vector<RawPost>& posts, const std::set<std::pair<std::string, std::string>>& accepted) {
  long merges = 0;
  for (auto& p : posts) {
    std::vector<std::string> out;
    out.reserve(p.tokens.size());
    for (std::size_t i = 0; i < p.tokens.size();) {
      if (i + 1 < p.tokens.size() && accepted.contains({p.tokens[i], p.tokens[i + 1]})) {
        out.push_back(join_ngram(p.tokens[i], p.tokens[i + 1]));
        i += 2;
        ++merges;
      } else {
        out.push_back(std::move(p.tokens[i]));
        ++i;
      }
    }
    p.tokens = std::move(out);
  }
  return merges;
}

inline long count_tokens(const std::vector<RawPost>& posts) {
  long n = 0;
  for (const auto& p : posts) n += static_cast<long>(p.tokens.size());
  return n;
}

}  // namespace detail

// Pass 1 accepts significant bigrams with count >= bigram_min and merges
// them; pass 2 joins an accepted bigram with a unigram or with another
// accepted bigram when the pair occurs more than higher_min times.
inline NgramResult mine_ngrams(std::vector<RawPost>& posts, const NgramOptions& opt = {}) {
  NgramResult r;
  r.tokens_before = detail::count_tokens(posts);
  if (r.tokens_before == 0) return r;

  auto test_pairs = [&](const detail::PairCounts& pc, std::vector<NgramCandidate>& out) {
    std::map<std::string, long> unigram;
    for (const auto& p : posts)
      for (const auto& t : p.tokens) ++unigram[t];
    const double N = static_cast<double>(detail::count_tokens(posts));
    for (const auto& [pair, n] : pc) {
      NgramCandidate c{pair.first, pair.second, n};
      test_ngram(c, N, unigram[pair.first] / N, unigram[pair.second] / N);
      r.warnings += c.degenerate;
      out.push_back(std::move(c));
    }
  };

  std::set<std::pair<std::string, std::string>> pass1;
  test_pairs(detail::adjacent_pairs(posts, [](auto&, auto&) { return true; }), r.bigrams);
  for (const auto& c : r.bigrams)
    if (c.significance <= opt.alpha && c.observed >= opt.bigram_min) pass1.insert({c.first, c.second});
  r.merges += detail::merge_pairs(posts, pass1);

  std::set<std::string> bigram_tokens;
  for (const auto& [a, b] : pass1) bigram_tokens.insert(join_ngram(a, b));
  r.accepted = bigram_tokens;

  auto is_bigram = [&](const std::string& t) { return bigram_tokens.contains(t); };
  std::set<std::pair<std::string, std::string>> pass2;
  test_pairs(detail::adjacent_pairs(posts, [&](const std::string& a, const std::string& b) { return is_bigram(a) || is_bigram(b); }),
             r.higher);
  for (const auto& c : r.higher)
    if (c.observed > opt.higher_min) {
      pass2.insert({c.first, c.second});
      r.accepted.insert(join_ngram(c.first, c.second));
    }
  r.merges += detail::merge_pairs(posts, pass2);
  r.tokens_after = detail::count_tokens(posts);
  return r;
}

// n-gram report: every tested candidate with its count and significance.
inline void save_ngram_report(const std::string& path, const NgramResult& r) {
  auto out = text::open_output(path);
  out << "ngram,pass,count,expected,significance,accepted\n";
  auto row = [&](const NgramCandidate& c, int pass) {
    const auto name = join_ngram(c.first, c.second);
    out << name << ',' << pass << ',' << c.observed << ',' << text::format_double(c.expected) << ','
        << text::format_double(c.significance) << ',' << (r.accepted.contains(name) ? 1 : 0) << '\n';
  };
  for (const auto& c : r.bigrams) row(c, 1);
  for (const auto& c : r.higher) row(c, 2);
}

// ---- pipeline ----

struct PreprocessOptions {
  VarianceFilter variance;
  double min_doc_fraction = 0.0002;
  NgramOptions ngrams;
};

struct PreprocessResult {
  Corpus corpus;
  NgramResult ngrams;
  long dropped_by_variance = 0;
  long dropped_as_rare = 0;
};

// Counts token sequences into a Corpus; vocabulary and blog ids in first-seen
// order, link targets included as blogs.
inline Corpus build_corpus(const std::vector<RawPost>& posts) {
  Vocabulary vocab;
  detail::BlogIndex blogs(nullptr);
  std::vector<Post> out;
  int horizon = 0;
  for (const auto& rp : posts) {
    Post p;
    p.blog = blogs.intern(rp.blog, 0);
    p.day = rp.day;
    horizon = std::max(horizon, rp.day);
    std::map<int, int> counts;
    for (const auto& t : rp.tokens) ++counts[vocab.intern(t)];
    for (const auto& [id, n] : counts) p.tokens.push_back({id, n});
    p.total_tokens = static_cast<int>(rp.tokens.size());
    for (const auto& l : rp.links) p.out_links.push_back(blogs.intern(l, 0));
    p.id = rp.id;
    out.push_back(std::move(p));
  }
  return Corpus(std::move(vocab), std::move(blogs).names(), std::move(out), horizon);
}

inline PreprocessResult preprocess(std::vector<RawPost> posts, const PreprocessOptions& opt = {}) {
  PreprocessResult r;
  const auto stats = token_stats(posts);
  const auto informative = variance_filter(stats, opt.variance);
  r.dropped_by_variance = static_cast<long>(stats.tokens.size() - informative.size());
  retain_tokens(posts, informative);
  const auto common = rare_token_filter(token_stats(posts), opt.min_doc_fraction);
  r.dropped_as_rare = static_cast<long>(informative.size() - common.size());
  retain_tokens(posts, common);
  r.ngrams = mine_ngrams(posts, opt.ngrams);
  r.corpus = build_corpus(posts);
  return r;
}

}  // namespace dtn
