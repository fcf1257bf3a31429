#pragma once

#include <algorithm>
#include <chrono>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dtn/error.hpp"
#include "dtn/text.hpp"

namespace dtn {

class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> tokens) {
    for (auto& t : tokens) add_new(std::move(t));
  }

  std::optional<int> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Returns the id of `token`, appending it when unseen.
  int intern(std::string_view token) {
    if (auto id = find(token)) return *id;
    return add_new(std::string(token));
  }

  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  int add_new(std::string token) {
    if (token.empty()) throw ParseError("empty token string", 0);
    const int id = static_cast<int>(tokens_.size());
    if (!index_.emplace(token, id).second) throw ParseError("duplicate vocabulary token '" + token + "'", 0);
    tokens_.push_back(std::move(token));
    return id;
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct TokenCount {
  int token = 0;
  int count = 0;
  friend bool operator==(const TokenCount&, const TokenCount&) = default;
};

struct Post {
  int blog = 0;
  int day = 1;
  std::vector<TokenCount> tokens;  // sorted by token id, counts > 0
  int total_tokens = 0;
  std::vector<int> out_links;  // sorted, unique blog ids
  std::optional<int> topic;    // latent; set only for simulated ground truth
  std::string id;              // optional external post id

  friend bool operator==(const Post&, const Post&) = default;
};

// Time-stamped posts over a fixed vocabulary. Immutable once constructed.
class Corpus {
 public:
  Corpus() = default;

  Corpus(Vocabulary vocab, std::vector<std::string> blog_names, std::vector<Post> posts, int horizon)
      : vocab_(std::move(vocab)), blog_names_(std::move(blog_names)), posts_(std::move(posts)), horizon_(horizon) {
    if (horizon_ < 0) throw ParseError("negative horizon", 0);
    const int nb = num_blogs();
    std::unordered_set<std::string> ids;
    for (std::size_t d = 0; d < posts_.size(); ++d) {
      Post& p = posts_[d];
      if (p.day < 1 || p.day > horizon_) throw ParseError("day out of range", 0);
      if (p.blog < 0 || p.blog >= nb) throw ParseError("blog id out of range", 0);
      std::sort(p.tokens.begin(), p.tokens.end(), [](auto& a, auto& b) { return a.token < b.token; });
      long sum = 0;
      for (std::size_t j = 0; j < p.tokens.size(); ++j) {
        const auto& tc = p.tokens[j];
        if (tc.token < 0 || static_cast<std::size_t>(tc.token) >= vocab_.size())
          throw ParseError("token id out of range", 0);
        if (tc.count <= 0) throw ParseError("non-positive token count", 0);
        if (j > 0 && p.tokens[j - 1].token == tc.token) throw ParseError("duplicate token in post", 0);
        sum += tc.count;
      }
      if (sum != p.total_tokens) throw ParseError("token counts do not sum to post length", 0);
      std::sort(p.out_links.begin(), p.out_links.end());
      p.out_links.erase(std::unique(p.out_links.begin(), p.out_links.end()), p.out_links.end());
      for (int l : p.out_links) {
        if (l < 0 || l >= nb) throw ParseError("link target out of range", 0);
        if (l == p.blog) throw ParseError("self-link", 0);
      }
      if (!p.id.empty() && !ids.insert(p.id).second) throw ParseError("duplicate post id '" + p.id + "'", 0);
      total_tokens_ += p.total_tokens;
    }
    daily_.assign(static_cast<std::size_t>(horizon_ + 1) * static_cast<std::size_t>(nb), 0);
    by_day_.assign(static_cast<std::size_t>(horizon_ + 1), {});
    blog_posts_.assign(static_cast<std::size_t>(nb), 0);
    for (std::size_t d = 0; d < posts_.size(); ++d) {
      const Post& p = posts_[d];
      ++daily_[static_cast<std::size_t>(p.day) * nb + p.blog];
      by_day_[static_cast<std::size_t>(p.day)].push_back(static_cast<int>(d));
      ++blog_posts_[static_cast<std::size_t>(p.blog)];
    }
  }

  int num_blogs() const noexcept { return static_cast<int>(blog_names_.size()); }
  int horizon() const noexcept { return horizon_; }
  int num_posts() const noexcept { return static_cast<int>(posts_.size()); }
  long total_tokens() const noexcept { return total_tokens_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  int vocab_size() const noexcept { return static_cast<int>(vocab_.size()); }
  const std::vector<std::string>& blog_names() const noexcept { return blog_names_; }
  const std::vector<Post>& posts() const noexcept { return posts_; }
  const Post& post(int d) const { return posts_[static_cast<std::size_t>(d)]; }

  // D_ti: posts by blog i on day t.
  int daily_count(int t, int i) const {
    return daily_[static_cast<std::size_t>(t) * num_blogs() + static_cast<std::size_t>(i)];
  }
  // Indices of the posts of day t, in stored order.
  std::span<const int> posts_on_day(int t) const { return by_day_[static_cast<std::size_t>(t)]; }
  int blog_post_count(int i) const { return blog_posts_[static_cast<std::size_t>(i)]; }
  // Blogs that only appear as link targets.
  bool zero_post(int i) const { return blog_post_count(i) == 0; }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.vocab_ == b.vocab_ && a.blog_names_ == b.blog_names_ && a.posts_ == b.posts_ &&
           a.horizon_ == b.horizon_;
  }

 private:
  Vocabulary vocab_;
  std::vector<std::string> blog_names_;
  std::vector<Post> posts_;
  int horizon_ = 0;
  long total_tokens_ = 0;
  std::vector<int> daily_;
  std::vector<std::vector<int>> by_day_;
  std::vector<int> blog_posts_;
};

struct Edge {
  int day = 1;
  int from = 0;
  int to = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Binary directed links a_{ii't} per day. Diagonal is always zero.
class AdjacencyTensor {
 public:
  AdjacencyTensor() = default;

  AdjacencyTensor(int num_nodes, int horizon, std::vector<Edge> edges)
      : nodes_(num_nodes), horizon_(horizon),
        bits_(static_cast<std::size_t>(horizon + 1) * num_nodes * num_nodes, 0) {
    for (const Edge& e : edges) {
      if (e.day < 1 || e.day > horizon) throw ParseError("link day out of range", 0);
      if (e.from < 0 || e.from >= num_nodes || e.to < 0 || e.to >= num_nodes)
        throw ParseError("link endpoint out of range", 0);
      if (e.from == e.to) throw ParseError("self-link", 0);
      auto& cell = bits_[index(e.day, e.from, e.to)];
      if (!cell) {
        cell = 1;
        edges_.push_back(e);
      }
    }
    std::sort(edges_.begin(), edges_.end());
  }

  int num_nodes() const noexcept { return nodes_; }
  int horizon() const noexcept { return horizon_; }
  bool at(int t, int i, int j) const { return bits_[index(t, i, j)] != 0; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  friend bool operator==(const AdjacencyTensor& a, const AdjacencyTensor& b) {
    return a.nodes_ == b.nodes_ && a.horizon_ == b.horizon_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t index(int t, int i, int j) const {
    return (static_cast<std::size_t>(t) * nodes_ + static_cast<std::size_t>(i)) * nodes_ + static_cast<std::size_t>(j);
  }

  int nodes_ = 0;
  int horizon_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<Edge> edges_;
};

// Blog-to-blog links implied by the posts' out-links.
inline AdjacencyTensor adjacency_from_corpus(const Corpus& c, std::span<const Edge> extra = {}) {
  std::vector<Edge> edges(extra.begin(), extra.end());
  for (const Post& p : c.posts())
    for (int l : p.out_links) edges.push_back({p.day, p.blog, l});
  return AdjacencyTensor(c.num_blogs(), c.horizon(), std::move(edges));
}

// ---------------------------------------------------------------------------
// File formats

inline Vocabulary load_vocabulary(const std::string& path) {
  auto in = text::open_input(path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto t = text::trim(line);
    if (t.empty()) throw ParseError("empty vocabulary line", ln);
    tokens.emplace_back(t);
  }
  try {
    return Vocabulary(std::move(tokens));
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " in " + path, 0);
  }
}

inline void save_lines(const std::string& path, const std::vector<std::string>& lines) {
  auto out = text::open_output(path);
  for (const auto& l : lines) out << l << '\n';
}

inline void save_vocabulary(const std::string& path, const Vocabulary& v) { save_lines(path, v.tokens()); }

inline std::vector<std::string> load_blog_names(const std::string& path) {
  auto in = text::open_input(path);
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    std::string name(text::trim(line));
    if (name.empty()) throw ParseError("empty blog name", ln);
    if (!seen.insert(name).second) throw ParseError("duplicate blog name '" + name + "'", ln);
    names.push_back(std::move(name));
  }
  return names;
}

struct LoadOptions {
  const Vocabulary* vocab = nullptr;                   // reject tokens outside it
  const std::vector<std::string>* blog_names = nullptr;  // fixes blog ids
  std::optional<int> horizon;                          // otherwise the last day seen
};

namespace detail {

// Maps blog identifiers to dense ids in first-seen order, optionally seeded
// from a fixed name list (in which case unknown names are rejected).
class BlogIndex {
 public:
  explicit BlogIndex(const std::vector<std::string>* fixed) {
    if (fixed)
      for (const auto& n : *fixed) intern(n, 0);
    fixed_ = fixed != nullptr;
  }
  int intern(std::string_view name, std::size_t line) {
    if (name.empty()) throw ParseError("empty blog id", line);
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    if (fixed_) throw ParseError("unknown blog id '" + std::string(name) + "'", line);
    const int id = static_cast<int>(names_.size());
    index_.emplace(std::string(name), id);
    names_.emplace_back(name);
    return id;
  }
  std::optional<int> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::vector<std::string> names() && { return std::move(names_); }
  const std::vector<std::string>& names() const& { return names_; }

 private:
  bool fixed_ = false;
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
};

// Day field: either a positive ordinal or an ISO date (YYYY-MM-DD).
struct DayField {
  std::optional<long> ordinal;
  std::optional<std::chrono::sys_days> date;
};

inline DayField parse_day(std::string_view s, std::size_t line) {
  if (auto v = text::parse_int<long>(s)) return {*v, std::nullopt};
  auto parts = text::split(s, '-');
  if (parts.size() == 3) {
    auto y = text::parse_int<int>(parts[0]);
    auto m = text::parse_int<unsigned>(parts[1]);
    auto d = text::parse_int<unsigned>(parts[2]);
    if (y && m && d) {
      std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{*m}, std::chrono::day{*d}};
      if (ymd.ok()) return {std::nullopt, std::chrono::sys_days{ymd}};
    }
  }
  throw ParseError("malformed day '" + std::string(s) + "'", line);
}

// Calendar dates become 1-based offsets from the earliest date in the file.
inline std::vector<long> resolve_days(const std::vector<DayField>& fields) {
  std::vector<long> out(fields.size());
  bool any_date = false, any_ordinal = false;
  std::chrono::sys_days first{};
  for (const auto& f : fields) {
    if (f.date) {
      if (!any_date || *f.date < first) first = *f.date;
      any_date = true;
    } else {
      any_ordinal = true;
    }
  }
  if (any_date && any_ordinal) throw ParseError("mixed calendar dates and day ordinals", 0);
  for (std::size_t r = 0; r < fields.size(); ++r)
    out[r] = fields[r].date ? (*fields[r].date - first).count() + 1 : *fields[r].ordinal;
  return out;
}

}  // namespace detail

// Corpus file: `day<TAB>blog<TAB>token:count,...<TAB>link,...[<TAB>post_id]`.
inline Corpus load_corpus(const std::string& path, const LoadOptions& opt = {}) {
  auto in = text::open_input(path);
  Vocabulary vocab = opt.vocab ? *opt.vocab : Vocabulary{};
  detail::BlogIndex blogs(opt.blog_names);
  std::vector<Post> posts;
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
    Post p;
    p.blog = blogs.intern(text::trim(f[1]), ln);
    if (!text::trim(f[2]).empty()) {
      for (auto item : text::split(f[2], ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string_view::npos) throw ParseError("token entry without count", ln);
        auto name = item.substr(0, colon);
        auto cnt = text::parse_int<int>(item.substr(colon + 1));
        if (!cnt || *cnt <= 0) throw ParseError("bad token count", ln);
        int id;
        if (opt.vocab) {
          auto found = vocab.find(name);
          if (!found) throw ParseError("unknown token '" + std::string(name) + "'", ln);
          id = *found;
        } else {
          try {
            id = vocab.intern(name);
          } catch (const ParseError&) {
            throw ParseError("empty token", ln);
          }
        }
        for (const auto& tc : p.tokens)
          if (tc.token == id) throw ParseError("duplicate token '" + std::string(name) + "'", ln);
        p.tokens.push_back({id, *cnt});
        p.total_tokens += *cnt;
      }
    }
    if (!text::trim(f[3]).empty()) {
      for (auto l : text::split(f[3], ',')) {
        const int target = blogs.intern(text::trim(l), ln);
        if (target == p.blog) throw ParseError("self-link", ln);
        p.out_links.push_back(target);
      }
    }
    if (f.size() == 5) p.id = std::string(text::trim(f[4]));
    posts.push_back(std::move(p));
    lines.push_back(ln);
  }
  const auto resolved = detail::resolve_days(days);
  long max_day = 0;
  std::unordered_set<std::string> ids;
  for (std::size_t r = 0; r < posts.size(); ++r) {
    const long day = resolved[r];
    if (day < 1 || (opt.horizon && day > *opt.horizon)) throw ParseError("day out of range", lines[r]);
    posts[r].day = static_cast<int>(day);
    max_day = std::max(max_day, day);
    if (!posts[r].id.empty() && !ids.insert(posts[r].id).second)
      throw ParseError("duplicate post id '" + posts[r].id + "'", lines[r]);
  }
  const int horizon = opt.horizon ? *opt.horizon : static_cast<int>(max_day);
  return Corpus(std::move(vocab), std::move(blogs).names(), std::move(posts), horizon);
}

inline void save_corpus(const std::string& path, const Corpus& c) {
  auto out = text::open_output(path);
  const auto& names = c.blog_names();
  for (const Post& p : c.posts()) {
    out << p.day << '\t' << names[static_cast<std::size_t>(p.blog)] << '\t';
    for (std::size_t j = 0; j < p.tokens.size(); ++j)
      out << (j ? "," : "") << c.vocabulary().token(p.tokens[j].token) << ':' << p.tokens[j].count;
    out << '\t';
    for (std::size_t j = 0; j < p.out_links.size(); ++j)
      out << (j ? "," : "") << names[static_cast<std::size_t>(p.out_links[j])];
    if (!p.id.empty()) out << '\t' << p.id;
    out << '\n';
  }
}

// Adjacency file: `t<TAB>i<TAB>i'` per link, blog ids resolved against the corpus.
inline std::vector<Edge> load_edges(const std::string& path, const Corpus& c) {
  auto in = text::open_input(path);
  detail::BlogIndex blogs(&c.blog_names());
  std::vector<Edge> edges;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    std::string_view sv = text::trim(line);
    if (sv.empty()) continue;
    auto f = text::split(sv, '\t');
    if (f.size() != 3) throw ParseError("expected 3 tab-separated fields", ln);
    auto t = text::parse_int<int>(text::trim(f[0]));
    if (!t) throw ParseError("malformed day", ln);
    if (*t < 1 || *t > c.horizon()) throw ParseError("day out of range", ln);
    const int i = blogs.intern(text::trim(f[1]), ln);
    const int j = blogs.intern(text::trim(f[2]), ln);
    if (i == j) throw ParseError("self-link", ln);
    edges.push_back({*t, i, j});
  }
  return edges;
}

inline void save_edges(const std::string& path, const AdjacencyTensor& a, const std::vector<std::string>& names) {
  auto out = text::open_output(path);
  for (const Edge& e : a.edges())
    out << e.day << '\t' << names[static_cast<std::size_t>(e.from)] << '\t' << names[static_cast<std::size_t>(e.to)] << '\n';
}

}  // namespace dtn
