#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "dtn/config.hpp"
#include "dtn/corpus.hpp"
#include "dtn/diagnostics.hpp"
#include "dtn/draws.hpp"
#include "dtn/error.hpp"
#include "dtn/genmodel.hpp"
#include "dtn/manifest.hpp"
#include "dtn/preprocess.hpp"
#include "dtn/sampler.hpp"
#include "json.hpp"

namespace dtn::cli {

enum ExitCode { ok = 0, internal = 1, usage = 2, bad_config = 3, io = 4, audit = 5 };

inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return bad_config;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e)) return io;
  if (dynamic_cast<const AuditError*>(&e)) return audit;
  return internal;
}

// Simulation draws from its own stream so that `fit` with the same seed does
// not replay the simulator's random numbers.
inline constexpr std::uint64_t kSimulationStream = 1000;

// Settings shared by commands that take a model configuration.
struct ConfigFlags {
  std::string path;
  std::vector<std::string> assignments;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", path, "config file of key=value lines");
    app->add_option("--set", assignments, "override one config key (key=value), repeatable");
    app->add_option("--seed", seed, "random seed (overrides the config)");
  }

  // File first, then --set, then --seed.
  ModelConfig resolve(RunManifest& m) const {
    ModelConfig c;
    if (!path.empty()) {
      m.record_input(path);
      c = load_config(path);
    }
    for (const auto& a : assignments) apply_assignment(c, a);
    if (seed) c.seed = *seed;
    require_valid(c);
    m.set_config(c);
    m.seed = c.seed;
    return c;
  }
};

struct CorpusFlags {
  std::string corpus, links, vocab, blogs;
  std::optional<int> days;

  void attach(CLI::App* app, bool with_links) {
    app->add_option("--corpus", corpus, "corpus file (day, blog, tokens, links[, post id])")->required();
    if (with_links) app->add_option("--links", links, "link file (day, from, to)");
    app->add_option("--vocab", vocab, "fix the vocabulary to this token list");
    app->add_option("--blogs", blogs, "fix blog ids to this name list (default: blogs.txt beside the corpus)");
    app->add_option("--days", days, "horizon T (default: last day in corpus or links)");
  }
};

// Checks an input against the manifest of the command that wrote it, then
// records its digest.
inline void use_input(RunManifest& m, const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("input file not found: " + path);
  verify_against_producer(path);
  m.record_input(path);
}

inline int last_link_day(const std::string& path) {
  auto in = text::open_input(path);
  std::string line;
  int last = 0;
  while (std::getline(in, line)) {
    auto f = text::split(text::trim(line), '\t');
    if (auto t = text::parse_int<int>(text::trim(f[0]))) last = std::max(last, *t);
  }
  return last;
}

struct LoadedData {
  Corpus corpus;
  AdjacencyTensor links;
  std::vector<Edge> extra_edges;
};

inline LoadedData load_data(const CorpusFlags& f, RunManifest& m) {
  namespace fs = std::filesystem;
  use_input(m, f.corpus);
  Vocabulary vocab;
  std::vector<std::string> names;
  LoadOptions opt;
  if (!f.vocab.empty()) {
    use_input(m, f.vocab);
    vocab = load_vocabulary(f.vocab);
    opt.vocab = &vocab;
  }
  std::string blogs = f.blogs;
  if (blogs.empty()) {
    const auto side = fs::path(f.corpus).parent_path() / "blogs.txt";
    if (fs::exists(side)) blogs = side.string();
  }
  if (!blogs.empty()) {
    use_input(m, blogs);
    names = load_blog_names(blogs);
    opt.blog_names = &names;
  }
  if (!f.links.empty()) use_input(m, f.links);
  if (f.days) {
    opt.horizon = *f.days;
  } else if (!f.links.empty()) {
    // the horizon has to cover the links too
    const Corpus probe = load_corpus(f.corpus, opt);
    opt.horizon = std::max(probe.horizon(), last_link_day(f.links));
  }
  LoadedData d;
  d.corpus = load_corpus(f.corpus, opt);
  if (!f.links.empty()) d.extra_edges = load_edges(f.links, d.corpus);
  d.links = adjacency_from_corpus(d.corpus, d.extra_edges);
  return d;
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// ---- per-command work ----

struct PreprocessFlags {
  std::string input;
  double alpha = 0.05;
  long bigram_min = 500, higher_min = 100;
  double min_doc_fraction = 0.0002;
  double variance_threshold = 0.0;
  std::optional<double> keep_fraction;
};

inline void run_preprocess(const PreprocessFlags& f, const std::string& out, RunManifest& m) {
  use_input(m, f.input);
  PreprocessOptions opt;
  opt.ngrams.alpha = f.alpha;
  opt.ngrams.bigram_min = f.bigram_min;
  opt.ngrams.higher_min = f.higher_min;
  opt.min_doc_fraction = f.min_doc_fraction;
  opt.variance.threshold = f.variance_threshold;
  opt.variance.keep_fraction = f.keep_fraction;
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("--alpha must lie in (0,1)");
  if (f.keep_fraction && !(*f.keep_fraction > 0.0 && *f.keep_fraction <= 1.0))
    throw ConfigError("--variance-keep-top must lie in (0,1]");
  auto r = preprocess(load_raw_posts(f.input), opt);
  save_corpus(join_path(out, "corpus.tsv"), r.corpus);
  save_vocabulary(join_path(out, "vocab.txt"), r.corpus.vocabulary());
  save_lines(join_path(out, "blogs.txt"), r.corpus.blog_names());
  save_ngram_report(join_path(out, "ngrams.csv"), r.ngrams);
  m.extra["posts"] = r.corpus.num_posts();
  m.extra["vocabulary"] = r.corpus.vocab_size();
  m.extra["dropped_by_variance"] = r.dropped_by_variance;
  m.extra["dropped_as_rare"] = r.dropped_as_rare;
  m.extra["ngram_merges"] = r.ngrams.merges;
  m.extra["tokens_before_merge"] = r.ngrams.tokens_before;
  m.extra["tokens_after_merge"] = r.ngrams.tokens_after;
}

inline void save_truth(const std::string& path, const GroundTruth& g) {
  nlohmann::json j;
  j["K"] = g.K;
  j["I"] = g.I;
  j["T"] = g.T;
  j["theta"] = g.theta;
  j["psi"] = g.psi;
  j["rho"] = g.rho;
  j["b"] = g.b;
  j["z"] = g.z;
  auto& pi = j["pi"] = nlohmann::json::array();
  for (int i = 0; i < g.I; ++i) pi.push_back(std::vector<double>(g.pi_row(i).begin(), g.pi_row(i).end()));
  auto& E = j["E"] = nlohmann::json::array();
  for (int k = 0; k < g.K; ++k)
    E.push_back(std::vector<int>(g.E.begin() + static_cast<std::ptrdiff_t>(k) * g.T,
                                 g.E.begin() + static_cast<std::ptrdiff_t>(k + 1) * g.T));
  text::open_output(path) << j.dump(1) << '\n';
}

inline void save_labels(const std::string& path, std::span<const int> labels) {
  auto out = text::open_output(path);
  for (int v : labels) out << v << '\n';
}

inline void run_simulate(const ConfigFlags& cf, const std::string& out, RunManifest& m) {
  const ModelConfig cfg = cf.resolve(m);
  Rng rng = make_rng(cfg.seed, kSimulationStream);
  const Simulation s = simulate(cfg, rng);
  save_corpus(join_path(out, "corpus.tsv"), s.corpus);
  save_vocabulary(join_path(out, "vocab.txt"), s.corpus.vocabulary());
  save_lines(join_path(out, "blogs.txt"), s.corpus.blog_names());
  save_edges(join_path(out, "links.tsv"), s.links, s.corpus.blog_names());
  save_truth(join_path(out, "truth.json"), s.truth);
  save_labels(join_path(out, "truth_z.txt"), s.truth.z);
  save_labels(join_path(out, "truth_b.txt"), s.truth.b);
  m.extra["posts"] = s.corpus.num_posts();
  m.extra["links"] = s.links.edges().size();
  m.extra["days"] = s.corpus.horizon();
}

// One line per iteration: acceptance rates of that iteration and the current
// log-likelihoods.
inline nlohmann::json log_record(int chain, const IterationLog& l) {
  const auto& a = l.acceptance;
  nlohmann::json acc = {{"pi", a.pi.rate()}, {"rho", a.rho.rate()}, {"E", a.E.rate()}, {"psi", a.psi.rate()}};
  for (std::size_t p = 0; p < a.theta.size(); ++p) acc["theta" + std::to_string(p)] = a.theta[p].rate();
  return {{"chain", chain},
          {"iteration", l.iteration},
          {"stage", "iteration"},
          {"acceptance", acc},
          {"post_loglik", l.post_loglik},
          {"link_loglik", l.link_loglik},
          {"nonempty_blocks", l.nonempty_blocks},
          {"xi_fallbacks", l.xi_fallbacks}};
}

inline void run_fit(const ConfigFlags& cf, const CorpusFlags& df, int chains, const std::string& out, RunManifest& m) {
  if (chains < 1) throw ConfigError("--chains must be at least 1");
  const ModelConfig cfg = cf.resolve(m);
  const LoadedData data = load_data(df, m);
  const NetworkDesign design(data.links);
  text::open_output(join_path(out, "config.txt")) << format_config(cfg);

  std::vector<AcceptanceTable> acc(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  auto run_chain = [&](int c) {
    try {
      const std::string dir = chains == 1 ? out : join_path(out, "chain-" + std::to_string(c));
      std::filesystem::create_directories(dir);
      auto log = text::open_output(join_path(dir, "log.jsonl"));
      SamplerOptions opt;
      opt.stream = static_cast<std::uint64_t>(c);
      opt.on_iteration = [&](const IterationLog& l) {
        acc[static_cast<std::size_t>(c)] += l.acceptance;
        log << log_record(c, l).dump() << '\n';
      };
      save_draws(dir, run_sampler(data.corpus, design, cfg, opt));
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  if (chains == 1) {
    run_chain(0);
  } else {
    std::vector<std::jthread> pool;
    for (int c = 0; c < chains; ++c) pool.emplace_back(run_chain, c);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  AcceptanceTable total;
  for (auto& a : acc) total += a;
  m.set_acceptance(total);
  m.extra["chains"] = chains;
  m.extra["posts"] = data.corpus.num_posts();
  m.extra["blogs"] = data.corpus.num_blogs();
  m.extra["days"] = data.corpus.horizon();
  m.extra["links"] = data.links.edges().size();
}

inline PosteriorDraws load_draws_checked(const std::string& dir, RunManifest& m) {
  for (const char* f : {"dims.csv", "draws.csv", "z.csv", "b.csv", "pi.csv", "rho.csv", "E.csv", "psi.csv", "theta.csv"}) {
    const auto p = join_path(dir, f);
    if (!std::filesystem::exists(p)) throw IoError("missing draws file: " + p);
    m.record_input(p);
  }
  return load_draws(dir);
}

inline void run_summarize(const std::string& draws_dir, const std::string& out, RunManifest& m) {
  const auto pd = load_draws_checked(draws_dir, m);
  if (pd.empty()) throw Error("no draws in " + draws_dir);
  {
    auto f = text::open_output(join_path(out, "summary.csv"));
    f << "parameter,mean,sd,lo,hi\n";
    for (const auto& s : summarize(pd))
      f << s.name << ',' << text::format_double(s.mean) << ',' << text::format_double(s.sd) << ','
        << text::format_double(s.lo) << ',' << text::format_double(s.hi) << '\n';
  }
  const auto modal = map_assignments(pd);
  save_labels(join_path(out, "modal_z.txt"), modal.z);
  save_labels(join_path(out, "modal_b.txt"), modal.b);
  const auto series = ari_series(pd);
  auto f = text::open_output(join_path(out, "ari_series.csv"));
  f << "draw,ari_z,ari_b\n";
  for (std::size_t s = 0; s < series.z.size(); ++s)
    f << s + 1 << ',' << text::format_double(series.z[s]) << ',' << text::format_double(series.b[s]) << '\n';
  m.extra["draws"] = pd.size();
}

inline std::vector<int> load_labels(const std::string& path) {
  auto in = text::open_input(path);
  std::map<std::string, int> ids;
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty()) continue;
    out.push_back(ids.emplace(std::string(t), static_cast<int>(ids.size())).first->second);
  }
  return out;
}

inline void run_ari(const std::string& a, const std::string& b, const std::string& out, RunManifest& m) {
  use_input(m, a);
  use_input(m, b);
  const auto la = load_labels(a), lb = load_labels(b);
  if (la.size() != lb.size())
    throw ConfigError("label files differ in length: " + std::to_string(la.size()) + " vs " + std::to_string(lb.size()));
  if (la.empty()) throw ConfigError("label files are empty");
  const double ari = adjusted_rand_index(la, lb);
  text::open_output(join_path(out, "ari.csv")) << "ari\n" << text::format_double(ari) << '\n';
  std::cout << text::format_double(ari) << '\n';
  m.extra["ari"] = ari;
}

struct WfFlags {
  std::string draws;
  int topic = 0;
  std::vector<std::string> tokens;
  int ell = ModelConfig{}.ell;
};

inline void run_wf(const CorpusFlags& df, const WfFlags& f, const std::string& out, RunManifest& m) {
  if (f.ell < 1) throw ConfigError("--ell must be at least 1");
  const LoadedData data = load_data(df, m);
  const auto pd = load_draws_checked(f.draws, m);
  if (pd.num_posts != data.corpus.num_posts()) throw ConfigError("draws were not fitted to this corpus");
  std::vector<int> ids;
  for (const auto& t : f.tokens) {
    auto id = data.corpus.vocabulary().find(t);
    if (!id) throw ConfigError("token '" + t + "' is not in the vocabulary");
    ids.push_back(*id);
  }
  auto rows = wf_series(data.corpus, pd, f.ell, f.topic, ids);
  auto o = text::open_output(join_path(out, "wf.csv"));
  o << "day,token,mean,lo,hi\n";
  for (const auto& r : rows)
    o << r.day << ',' << data.corpus.vocabulary().token(r.token) << ',' << text::format_double(r.mean) << ','
      << text::format_double(r.lo) << ',' << text::format_double(r.hi) << '\n';
}

inline void run_select_k(const ConfigFlags& cf, const CorpusFlags& df, const std::vector<int>& grid,
                         const std::string& out, RunManifest& m) {
  const ModelConfig cfg = cf.resolve(m);
  const LoadedData data = load_data(df, m);
  for (int K : grid)
    if (K < 2) throw ConfigError("every K in --grid must be at least 2");
  const auto sel = select_k(data.corpus, NetworkDesign(data.links), cfg, grid);
  auto o = text::open_output(join_path(out, "select_k.csv"));
  o << "K,criterion\n";
  for (std::size_t i = 0; i < sel.grid.size(); ++i) o << sel.grid[i] << ',' << text::format_double(sel.criterion[i]) << '\n';
  std::cout << "best K " << sel.best << '\n';
  m.extra["best_K"] = sel.best;
}

// ---- dispatch ----

// Parses argv, runs one command and always leaves a manifest in --out-dir
// (marked failed on error) once the output directory is known.
inline int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Dynamic topic and blog network model"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand help for all commands");

  std::string out_dir;
  auto with_out = [&](CLI::App* sub) {
    sub->add_option("--out-dir", out_dir, "directory for every output of this command")->required();
    return sub;
  };

  PreprocessFlags pf;
  auto* pre = with_out(app.add_subcommand("preprocess", "build a corpus from raw tokenized posts"));
  pre->add_option("--input", pf.input, "raw posts: day, blog, space-separated tokens, links[, post id]")->required();
  pre->add_option("--alpha", pf.alpha, "n-gram significance level");
  pre->add_option("--bigram-min", pf.bigram_min, "minimum count for a bigram");
  pre->add_option("--higher-min", pf.higher_min, "minimum count for a trigram built on a bigram");
  pre->add_option("--min-doc-fraction", pf.min_doc_fraction, "drop tokens in a smaller share of posts");
  pre->add_option("--variance-threshold", pf.variance_threshold, "keep tokens whose TF-IDF variance exceeds this");
  pre->add_option("--variance-keep-top", pf.keep_fraction, "keep this top fraction of tokens by TF-IDF variance");

  ConfigFlags sim_cfg;
  auto* sim = with_out(app.add_subcommand("simulate", "draw a corpus and link network from the generative model"));
  sim_cfg.attach(sim);

  ConfigFlags fit_cfg;
  CorpusFlags fit_data;
  int chains = 1;
  auto* fit = with_out(app.add_subcommand("fit", "run the posterior sampler"));
  fit_cfg.attach(fit);
  fit_data.attach(fit, true);
  fit->add_option("--chains", chains, "independent chains, run concurrently");

  std::string sum_draws;
  auto* sum = with_out(app.add_subcommand("summarize", "posterior means, sd and 95% intervals"));
  sum->add_option("--draws", sum_draws, "directory written by fit")->required();

  CorpusFlags wf_data;
  WfFlags wf_flags;
  auto* wf = with_out(app.add_subcommand("wf", "weighted-frequency series of tokens within a topic"));
  wf_data.attach(wf, false);
  wf->add_option("--draws", wf_flags.draws, "directory written by fit")->required();
  wf->add_option("--topic", wf_flags.topic, "topic index")->required();
  wf->add_option("--tokens", wf_flags.tokens, "tokens to report")->required()->delimiter(',');
  wf->add_option("--ell", wf_flags.ell, "sliding window length used in the fit");

  std::string ari_a, ari_b;
  auto* ari = with_out(app.add_subcommand("ari", "adjusted Rand index of two label files"));
  ari->add_option("--a", ari_a, "labels, one per line")->required();
  ari->add_option("--b", ari_b, "labels, one per line")->required();

  ConfigFlags sk_cfg;
  CorpusFlags sk_data;
  std::vector<int> grid{2, 3, 4, 5, 6, 7, 8};
  auto* sk = with_out(app.add_subcommand("select-k", "fit over a grid of K and report the criterion"));
  sk_cfg.attach(sk);
  sk_data.attach(sk, true);
  sk->add_option("--grid", grid, "values of K")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  RunManifest m;
  m.command = cmd->get_name();
  for (int i = 0; i < argc; ++i) m.argv.emplace_back(argv[i]);
  const auto t0 = std::chrono::system_clock::now();
  const auto steady0 = std::chrono::steady_clock::now();
  m.started = utc_timestamp(t0);

  auto finish = [&](const char* status) {
    m.finished = utc_timestamp();
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - steady0).count();
    m.extra["status"] = status;
    write_manifest(out_dir, m);
  };

  bool have_dir = false;
  try {
    std::filesystem::create_directories(out_dir);
    have_dir = true;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"code", io}}.dump() << '\n';
    return io;
  }

  try {
    // no command may write next to its inputs
    std::vector<std::string> dirs;
    auto parent = [&](const std::string& f) {
      if (f.empty()) return;
      const std::filesystem::path p(f);
      dirs.push_back(p.has_parent_path() ? p.parent_path().string() : ".");
    };
    auto data_parents = [&](const CorpusFlags& d) {
      for (const auto* f : {&d.corpus, &d.links, &d.vocab, &d.blogs}) parent(*f);
    };
    if (cmd == fit) data_parents(fit_data);
    if (cmd == wf) data_parents(wf_data);
    if (cmd == sk) data_parents(sk_data);
    if (cmd == pre) parent(pf.input);
    if (cmd == sim) parent(sim_cfg.path);
    if (cmd == fit) parent(fit_cfg.path);
    if (cmd == sk) parent(sk_cfg.path);
    if (cmd == ari) {
      parent(ari_a);
      parent(ari_b);
    }
    if (cmd == sum) dirs.push_back(sum_draws);
    if (cmd == wf) dirs.push_back(wf_flags.draws);
    for (const auto& d : dirs) {
      std::error_code ec;
      if (std::filesystem::equivalent(d, out_dir, ec)) {
        have_dir = false;  // leave the producer's manifest alone
        throw ConfigError("--out-dir " + out_dir + " holds inputs of this command; choose another directory");
      }
    }

    if (cmd == pre) run_preprocess(pf, out_dir, m);
    else if (cmd == sim) run_simulate(sim_cfg, out_dir, m);
    else if (cmd == fit) run_fit(fit_cfg, fit_data, chains, out_dir, m);
    else if (cmd == sum) run_summarize(sum_draws, out_dir, m);
    else if (cmd == wf) run_wf(wf_data, wf_flags, out_dir, m);
    else if (cmd == ari) run_ari(ari_a, ari_b, out_dir, m);
    else if (cmd == sk) run_select_k(sk_cfg, sk_data, grid, out_dir, m);
    finish("ok");
    return ok;
  } catch (const std::exception& e) {
    const int code = exit_code(e);
    std::cerr << nlohmann::json{{"error", e.what()}, {"code", code}, {"command", m.command}}.dump() << '\n';
    m.extra["error"] = e.what();
    if (have_dir) {
      try {
        finish("failed");
      } catch (const std::exception&) {
      }
    }
    return code;
  }
}

}  // namespace dtn::cli
