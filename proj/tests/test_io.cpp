#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "dtn/config.hpp"
#include "dtn/corpus.hpp"
#include "dtn/draws.hpp"
#include "dtn/genmodel.hpp"
#include "support.hpp"

using namespace dtn;

namespace {

void write(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  f << body;
}

std::size_t parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "expected a parse error";
  return 0;
}

}  // namespace

TEST(CorpusFiles, RoundTrip) {
  std::mt19937_64 rng(1);
  auto base = support::random_corpus(rng, 5, 9, 25, 40, 6);
  auto posts = base.posts();
  posts[0].out_links = {3, 1};
  posts[0].blog = 0;
  posts[5].id = "post-5";
  const Corpus c(base.vocabulary(), base.blog_names(), posts, 9);
  const auto dir = support::scratch_dir("corpus_rt");
  save_corpus(dir + "/corpus.tsv", c);
  save_vocabulary(dir + "/vocab.txt", c.vocabulary());
  save_lines(dir + "/blogs.txt", c.blog_names());
  const auto vocab = load_vocabulary(dir + "/vocab.txt");
  const auto names = load_blog_names(dir + "/blogs.txt");
  LoadOptions opt;
  opt.vocab = &vocab;
  opt.blog_names = &names;
  opt.horizon = 9;
  EXPECT_EQ(load_corpus(dir + "/corpus.tsv", opt), c);
  // the adjacency from out-links survives too
  EXPECT_EQ(adjacency_from_corpus(load_corpus(dir + "/corpus.tsv", opt)), adjacency_from_corpus(c));
}

TEST(CorpusFiles, CalendarDatesBecomeOffsets) {
  const auto dir = support::scratch_dir("corpus_dates");
  write(dir + "/c.tsv", "2008-09-01\ta\tx:2\tb\n2008-08-31\tb\ty:1\t\n2008-08-01\ta\tx:1\t\n");
  const auto c = load_corpus(dir + "/c.tsv");
  EXPECT_EQ(c.horizon(), 32);
  EXPECT_EQ(c.post(0).day, 32);
  EXPECT_EQ(c.post(1).day, 31);
  EXPECT_EQ(c.post(2).day, 1);
  EXPECT_EQ(c.post(0).out_links, (std::vector<int>{1}));
}

TEST(CorpusFiles, ErrorsCarryLineNumbers) {
  const auto dir = support::scratch_dir("corpus_err");
  const auto path = dir + "/c.tsv";
  auto line_of = [&](const std::string& body, const LoadOptions& opt = {}) {
    write(path, body);
    return parse_error_line([&] { load_corpus(path, opt); });
  };
  EXPECT_EQ(line_of("1\ta\tx:1\t\n2\ta\tx\t\n"), 2u);
  EXPECT_EQ(line_of("1\ta\tx:0\t\n"), 1u);
  EXPECT_EQ(line_of("1\ta\tx:1,x:2\t\n"), 1u);
  EXPECT_EQ(line_of("1\ta\tx:1\ta\n"), 1u);
  EXPECT_EQ(line_of("1\ta\tx:1\t\n\n3\ta\n"), 3u);
  EXPECT_EQ(line_of("1\ta\tx:1\t\tp\n2\tb\tx:1\t\tp\n"), 2u);
  EXPECT_EQ(line_of("1\ta\tx:1\t\n2008-01-01\ta\tx:1\t\n"), 0u);  // mixed day formats
  const Vocabulary v({"x"});
  LoadOptions opt;
  opt.vocab = &v;
  EXPECT_EQ(line_of("1\ta\tx:1\t\n1\ta\ty:1\t\n", opt), 2u);
  LoadOptions hz;
  hz.horizon = 3;
  EXPECT_EQ(line_of("1\ta\tx:1\t\n4\ta\tx:1\t\n", hz), 2u);
  EXPECT_THROW(load_corpus(dir + "/absent.tsv"), IoError);
}

TEST(CorpusFiles, EdgesRoundTrip) {
  ModelConfig cfg;
  cfg.K = 2;
  cfg.sim.blogs = 6;
  cfg.sim.days = 8;
  cfg.sim.vocab_size = 10;
  cfg.sim.theta = {-1.0, 0, 0, 0, 0};
  Rng rng = make_rng(3, 0);
  const auto s = simulate(cfg, rng);
  ASSERT_FALSE(s.links.edges().empty());
  const auto dir = support::scratch_dir("edges");
  save_edges(dir + "/links.tsv", s.links, s.corpus.blog_names());
  const auto edges = load_edges(dir + "/links.tsv", s.corpus);
  EXPECT_EQ(AdjacencyTensor(6, 8, edges), s.links);
  write(dir + "/bad.tsv", "1\t0\t1\n9\t0\t1\n");
  EXPECT_EQ(parse_error_line([&] { load_edges(dir + "/bad.tsv", s.corpus); }), 2u);
  write(dir + "/bad.tsv", "1\t0\t0\n");
  EXPECT_EQ(parse_error_line([&] { load_edges(dir + "/bad.tsv", s.corpus); }), 1u);
}

TEST(Config, FormatParsesBack) {
  ModelConfig c;
  c.K = 7;
  c.eta = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  c.sigma_theta_prop = {0.1, 0.2, 0.3, 0.4, 0.5};
  c.sim.theta = {-4, 1, -0.2, 0.3, 0.3};
  c.sim.psi = {1, 2, 3, 4, 5, 6, 7};
  c.alpha = 0.123456789012345;
  c.audit = false;
  c.seed = 99;
  EXPECT_EQ(parse_config(format_config(c)), c);
  EXPECT_EQ(parse_config(format_config(ModelConfig{})), ModelConfig{});
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("K = 3\nnot_a_key = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("K 3\n"), ConfigError);
  EXPECT_THROW(parse_config("K = three\n"), ConfigError);
  EXPECT_EQ(parse_config("# comment\nK = 3  # trailing\n\n").K, 3);
  ModelConfig bad;
  bad.K = 0;
  bad.beta = -1;
  bad.burn_in = bad.iters;
  EXPECT_EQ(validate_config(bad).size(), 3u);
  EXPECT_THROW(require_valid(bad), ConfigError);
}

TEST(DrawFiles, RoundTripAndValidation) {
  PosteriorDraws pd{2, 3, 4, 5, {}};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int s = 0; s < 3; ++s) {
    DrawSnapshot d;
    d.iteration = 10 * (s + 1);
    d.z = {0, 1, 1, 0, s % 2};
    d.b = {0, 1, 2};
    for (int i = 0; i < 3; ++i) {
      const double x = u(rng);
      d.pi.push_back(x);
      d.pi.push_back(1.0 - x);
    }
    d.rho = {u(rng), u(rng), u(rng)};
    d.E = {0, 1, 0, 0, 1, 1, 0, s % 2 == 0};
    d.psi = {u(rng), u(rng)};
    d.theta = {-4.1234567890123, 1, u(rng), 0.3, 1e-9};
    pd.draws.push_back(d);
  }
  const auto dir = support::scratch_dir("draws");
  save_draws(dir, pd);
  EXPECT_EQ(load_draws(dir), pd);

  DrawSnapshot bad = pd.draws[0];
  bad.pi[0] += 0.1;
  EXPECT_THROW(check_snapshot(bad, 2), AuditError);
  write(dir + "/rho.csv", "draw,blog,value\n0,7,1.0\n");
  EXPECT_THROW(load_draws(dir), ParseError);
}
