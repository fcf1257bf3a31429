#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dtn/corpus.hpp"
#include "dtn/preprocess.hpp"

namespace support {

// Random corpus over blogs 0..I-1, days 1..T and tokens 0..W-1. Every post
// has between 1 and max_len tokens.
inline dtn::Corpus random_corpus(std::mt19937_64& rng, int I, int T, int W, int posts, int max_len) {
  std::uniform_int_distribution<int> blog(0, I - 1), day(1, T), token(0, W - 1), len(1, max_len);
  std::vector<dtn::Post> out;
  for (int d = 0; d < posts; ++d) {
    dtn::Post p;
    p.blog = blog(rng);
    p.day = day(rng);
    std::vector<int> counts(static_cast<std::size_t>(W), 0);
    const int n = len(rng);
    for (int s = 0; s < n; ++s) ++counts[static_cast<std::size_t>(token(rng))];
    for (int w = 0; w < W; ++w)
      if (counts[static_cast<std::size_t>(w)]) p.tokens.push_back({w, counts[static_cast<std::size_t>(w)]});
    p.total_tokens = n;
    out.push_back(std::move(p));
  }
  std::vector<std::string> vocab, blogs;
  for (int w = 0; w < W; ++w) vocab.push_back("t" + std::to_string(w));
  for (int i = 0; i < I; ++i) blogs.push_back("b" + std::to_string(i));
  return dtn::Corpus(dtn::Vocabulary(vocab), blogs, std::move(out), T);
}

// `posts` posts of 20 filler tokens each. Every post carries the pair
// "white house" once, adjacent, and "alpha" and "beta" once each at
// independent positions.
inline std::vector<dtn::RawPost> planted_ngram_posts(std::mt19937_64& rng, int posts) {
  std::uniform_int_distribution<int> filler(0, 49);
  std::vector<dtn::RawPost> out;
  for (int d = 0; d < posts; ++d) {
    dtn::RawPost p;
    p.day = 1 + d % 30;
    p.blog = "b" + std::to_string(d % 7);
    for (int n = 0; n < 20; ++n) p.tokens.push_back("f" + std::to_string(filler(rng)));
    auto insert_at = [&](std::string tok) {
      std::uniform_int_distribution<std::size_t> pos(0, p.tokens.size());
      p.tokens.insert(p.tokens.begin() + static_cast<std::ptrdiff_t>(pos(rng)), std::move(tok));
    };
    insert_at("alpha");
    insert_at("beta");
    std::uniform_int_distribution<std::size_t> pos(0, p.tokens.size());
    const auto at = p.tokens.begin() + static_cast<std::ptrdiff_t>(pos(rng));
    p.tokens.insert(p.tokens.insert(at, "house"), "white");
    out.push_back(std::move(p));
  }
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dtn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace support
