#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dtn/error.hpp"
#include "dtn/text.hpp"

namespace dtn {

inline constexpr int kNumCovariates = 5;
using Theta = std::array<double, kNumCovariates>;

enum class BlockPrior { uniform, category };

// Settings used only by the forward simulator.
struct SimulationSettings {
  int blogs = 40;
  int days = 100;
  int vocab_size = 500;
  // Posterior means reported for the political blog network.
  Theta theta{-8.524, 1.058, -0.163, 0.497, 0.330};
  std::vector<double> psi;  // fixed boosts; empty means draw from Gamma(a_psi, b_psi)
  BlockPrior block_prior = BlockPrior::uniform;

  friend bool operator==(const SimulationSettings&, const SimulationSettings&) = default;
};

struct ModelConfig {
  int K = 22;
  int ell = 62;
  double alpha = 0.1;
  double beta = 0.1;
  double P = 50.0;
  double lambda_D = 50.0;
  std::vector<double> eta{0.01};  // one value for all topics, or one per topic
  double E_pi = 0.2;
  double lambda_B = 25.0;
  double alpha_B = 1.0;
  double a_psi = 1.0, b_psi = 2.0;
  double a_rho = 4.0, b_rho = 1.0;
  double mu_theta = 0.0, sigma_theta = 1000.0;
  double rho_prior_mean = 4.0, rho_prior_sd = 1000.0;
  double psi_prior_mean = 0.0, psi_prior_sd = 1000.0;
  double sigma_rho = 0.1;
  double sigma_psi = 0.5;
  Theta sigma_theta_prop{1.0, 0.25, 0.25, 0.25, 0.25};
  int iters = 1000;
  int burn_in = 100;
  int thin = 10;
  int sweeps = 10;
  int net_updates = 10;
  int block_sweeps = 10;
  std::uint64_t seed = 1;
  bool audit = true;
  SimulationSettings sim;

  double eta_for(int k) const { return eta.size() == 1 ? eta[0] : eta[static_cast<std::size_t>(k)]; }
  int retained_draws() const { return iters > burn_in && thin > 0 ? (iters - burn_in) / thin : 0; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Every violated invariant, not just the first.
inline std::vector<std::string> validate_config(const ModelConfig& c) {
  std::vector<std::string> errs;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0)) errs.push_back(std::string(name) + " must be positive");
  };
  if (c.K < 1) errs.emplace_back("K must be at least 1");
  if (c.ell < 1) errs.emplace_back("ell must be at least 1");
  positive(c.alpha, "alpha");
  positive(c.beta, "beta");
  positive(c.P, "P");
  positive(c.lambda_D, "lambda_D");
  if (c.eta.empty() || (c.eta.size() != 1 && c.eta.size() != static_cast<std::size_t>(std::max(c.K, 0))))
    errs.emplace_back("eta must have 1 or K entries");
  for (double e : c.eta)
    if (!(e >= 0.0 && e <= 1.0)) errs.emplace_back("eta must lie in [0,1]");
  if (!(c.E_pi > 0.0 && c.E_pi < 1.0)) errs.emplace_back("E_pi must lie in (0,1)");
  positive(c.lambda_B, "lambda_B");
  positive(c.alpha_B, "alpha_B");
  positive(c.a_psi, "a_psi");
  positive(c.b_psi, "b_psi");
  positive(c.a_rho, "a_rho");
  positive(c.b_rho, "b_rho");
  positive(c.sigma_theta, "sigma_theta");
  positive(c.rho_prior_sd, "rho_prior_sd");
  positive(c.psi_prior_sd, "psi_prior_sd");
  positive(c.sigma_rho, "sigma_rho");
  positive(c.sigma_psi, "sigma_psi");
  for (double s : c.sigma_theta_prop)
    if (!(s > 0.0)) errs.emplace_back("sigma_theta_prop entries must be positive");
  if (c.iters < 0) errs.emplace_back("iters must be non-negative");
  if (c.burn_in < 0) errs.emplace_back("burn_in must be non-negative");
  if (c.burn_in >= c.iters) errs.emplace_back("nothing retained: burn_in must be less than iters");
  if (c.thin < 1) errs.emplace_back("thin must be at least 1");
  if (c.sweeps < 0) errs.emplace_back("sweeps must be non-negative");
  if (c.net_updates < 0) errs.emplace_back("net_updates must be non-negative");
  if (c.block_sweeps < 0) errs.emplace_back("block_sweeps must be non-negative");
  if (c.sim.blogs < 1) errs.emplace_back("blogs must be at least 1");
  if (c.sim.days < 1) errs.emplace_back("days must be at least 1");
  if (c.sim.vocab_size < 1) errs.emplace_back("vocab_size must be at least 1");
  if (!c.sim.psi.empty() && c.sim.psi.size() != static_cast<std::size_t>(std::max(c.K, 0)))
    errs.emplace_back("psi_true must have K entries");
  for (double p : c.sim.psi)
    if (!(p >= 0.0)) errs.emplace_back("psi_true entries must be non-negative");
  return errs;
}

inline void require_valid(const ModelConfig& c) {
  const auto errs = validate_config(c);
  if (errs.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errs) msg += "\n  " + e;
  throw ConfigError(msg);
}

namespace detail {

inline std::string join_doubles(const double* v, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? "," : "") + text::format_double(v[i]);
  return out;
}

inline std::vector<double> parse_double_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  if (text::trim(value).empty()) return out;
  for (auto part : text::split(value, ',')) {
    auto v = text::parse_double(part);
    if (!v) throw ConfigError("bad number in '" + std::string(key) + "': " + std::string(value));
    out.push_back(*v);
  }
  return out;
}

struct Field {
  std::function<void(ModelConfig&, std::string_view)> set;
  std::function<std::string(const ModelConfig&)> get;
};

template <class T>
Field scalar(T ModelConfig::*m, const char* key) {
  Field f;
  f.set = [m, key](ModelConfig& c, std::string_view v) {
    if constexpr (std::is_same_v<T, double>) {
      auto x = text::parse_double(v);
      if (!x) throw ConfigError(std::string("bad value for ") + key + ": " + std::string(v));
      c.*m = *x;
    } else if constexpr (std::is_same_v<T, bool>) {
      auto t = text::trim(v);
      if (t == "1" || t == "true") c.*m = true;
      else if (t == "0" || t == "false") c.*m = false;
      else throw ConfigError(std::string("bad value for ") + key + ": " + std::string(v));
    } else {
      auto x = text::parse_int<T>(text::trim(v));
      if (!x) throw ConfigError(std::string("bad value for ") + key + ": " + std::string(v));
      c.*m = *x;
    }
  };
  f.get = [m](const ModelConfig& c) {
    if constexpr (std::is_same_v<T, double>) return text::format_double(c.*m);
    else if constexpr (std::is_same_v<T, bool>) return std::string(c.*m ? "true" : "false");
    else return std::to_string(c.*m);
  };
  return f;
}

inline Field theta_field(Theta ModelConfig::*m, const char* key) {
  return {[m, key](ModelConfig& c, std::string_view v) {
            auto xs = parse_double_list(key, v);
            if (xs.size() != kNumCovariates) throw ConfigError(std::string(key) + " needs 5 values");
            std::copy(xs.begin(), xs.end(), (c.*m).begin());
          },
          [m](const ModelConfig& c) { return join_doubles((c.*m).data(), kNumCovariates); }};
}

inline Field int_sim(int SimulationSettings::*m, const char* key) {
  return {[m, key](ModelConfig& c, std::string_view v) {
            auto x = text::parse_int<int>(text::trim(v));
            if (!x) throw ConfigError(std::string("bad value for ") + key + ": " + std::string(v));
            c.sim.*m = *x;
          },
          [m](const ModelConfig& c) { return std::to_string(c.sim.*m); }};
}

// Keys follow the model's symbol names.
inline const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("K", scalar(&ModelConfig::K, "K"));
    t.emplace_back("ell", scalar(&ModelConfig::ell, "ell"));
    t.emplace_back("alpha", scalar(&ModelConfig::alpha, "alpha"));
    t.emplace_back("beta", scalar(&ModelConfig::beta, "beta"));
    t.emplace_back("P", scalar(&ModelConfig::P, "P"));
    t.emplace_back("lambda_D", scalar(&ModelConfig::lambda_D, "lambda_D"));
    t.emplace_back("eta", Field{[](ModelConfig& c, std::string_view v) { c.eta = parse_double_list("eta", v); },
                                [](const ModelConfig& c) { return join_doubles(c.eta.data(), c.eta.size()); }});
    t.emplace_back("E_pi", scalar(&ModelConfig::E_pi, "E_pi"));
    t.emplace_back("lambda_B", scalar(&ModelConfig::lambda_B, "lambda_B"));
    t.emplace_back("alpha_B", scalar(&ModelConfig::alpha_B, "alpha_B"));
    t.emplace_back("a_psi", scalar(&ModelConfig::a_psi, "a_psi"));
    t.emplace_back("b_psi", scalar(&ModelConfig::b_psi, "b_psi"));
    t.emplace_back("a_rho", scalar(&ModelConfig::a_rho, "a_rho"));
    t.emplace_back("b_rho", scalar(&ModelConfig::b_rho, "b_rho"));
    t.emplace_back("mu_theta", scalar(&ModelConfig::mu_theta, "mu_theta"));
    t.emplace_back("sigma_theta", scalar(&ModelConfig::sigma_theta, "sigma_theta"));
    t.emplace_back("rho_prior_mean", scalar(&ModelConfig::rho_prior_mean, "rho_prior_mean"));
    t.emplace_back("rho_prior_sd", scalar(&ModelConfig::rho_prior_sd, "rho_prior_sd"));
    t.emplace_back("psi_prior_mean", scalar(&ModelConfig::psi_prior_mean, "psi_prior_mean"));
    t.emplace_back("psi_prior_sd", scalar(&ModelConfig::psi_prior_sd, "psi_prior_sd"));
    t.emplace_back("sigma_rho", scalar(&ModelConfig::sigma_rho, "sigma_rho"));
    t.emplace_back("sigma_psi", scalar(&ModelConfig::sigma_psi, "sigma_psi"));
    t.emplace_back("sigma_theta_prop", theta_field(&ModelConfig::sigma_theta_prop, "sigma_theta_prop"));
    t.emplace_back("iters", scalar(&ModelConfig::iters, "iters"));
    t.emplace_back("burn_in", scalar(&ModelConfig::burn_in, "burn_in"));
    t.emplace_back("thin", scalar(&ModelConfig::thin, "thin"));
    t.emplace_back("sweeps", scalar(&ModelConfig::sweeps, "sweeps"));
    t.emplace_back("net_updates", scalar(&ModelConfig::net_updates, "net_updates"));
    t.emplace_back("block_sweeps", scalar(&ModelConfig::block_sweeps, "block_sweeps"));
    t.emplace_back("seed", scalar(&ModelConfig::seed, "seed"));
    t.emplace_back("audit", scalar(&ModelConfig::audit, "audit"));
    t.emplace_back("blogs", int_sim(&SimulationSettings::blogs, "blogs"));
    t.emplace_back("days", int_sim(&SimulationSettings::days, "days"));
    t.emplace_back("vocab_size", int_sim(&SimulationSettings::vocab_size, "vocab_size"));
    t.emplace_back("theta_true",
                   Field{[](ModelConfig& c, std::string_view v) {
                           auto xs = parse_double_list("theta_true", v);
                           if (xs.size() != kNumCovariates) throw ConfigError("theta_true needs 5 values");
                           std::copy(xs.begin(), xs.end(), c.sim.theta.begin());
                         },
                         [](const ModelConfig& c) { return join_doubles(c.sim.theta.data(), kNumCovariates); }});
    t.emplace_back("psi_true",
                   Field{[](ModelConfig& c, std::string_view v) { c.sim.psi = parse_double_list("psi_true", v); },
                         [](const ModelConfig& c) { return join_doubles(c.sim.psi.data(), c.sim.psi.size()); }});
    t.emplace_back("block_prior", Field{[](ModelConfig& c, std::string_view v) {
                                          auto t = text::trim(v);
                                          if (t == "uniform") c.sim.block_prior = BlockPrior::uniform;
                                          else if (t == "category") c.sim.block_prior = BlockPrior::category;
                                          else throw ConfigError("block_prior must be uniform or category");
                                        },
                                        [](const ModelConfig& c) {
                                          return std::string(c.sim.block_prior == BlockPrior::uniform ? "uniform"
                                                                                                      : "category");
                                        }});
    return t;
  }();
  return table;
}

}  // namespace detail

// Applies one `key=value` assignment.
inline void set_config_value(ModelConfig& c, std::string_view key, std::string_view value) {
  const auto k = text::trim(key);
  for (const auto& [name, field] : detail::fields()) {
    if (name == k) {
      field.set(c, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(k) + "'");
}

inline void apply_assignment(ModelConfig& c, std::string_view line) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value: " + std::string(line));
  set_config_value(c, line.substr(0, eq), line.substr(eq + 1));
}

inline ModelConfig parse_config(std::string_view contents, ModelConfig base = {}) {
  std::size_t ln = 0;
  for (auto raw : text::split(contents, '\n')) {
    ++ln;
    auto hash = raw.find('#');
    auto line = text::trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    try {
      apply_assignment(base, line);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(ln) + ": " + e.what());
    }
  }
  return base;
}

inline ModelConfig load_config(const std::string& path, ModelConfig base = {}) {
  auto in = text::open_input(path);
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(contents, std::move(base));
}

// Ordered key/value echo of every field; parse_config inverts it.
inline std::vector<std::pair<std::string, std::string>> config_entries(const ModelConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : detail::fields()) out.emplace_back(name, field.get(c));
  return out;
}

inline std::string format_config(const ModelConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + "=" + v + "\n";
  return out;
}

}  // namespace dtn
