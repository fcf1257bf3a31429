#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dtn/config.hpp"
#include "dtn/error.hpp"
#include "dtn/text.hpp"

namespace dtn {

// One retained iteration of the sampler.
struct DrawSnapshot {
  int iteration = 0;
  std::vector<int> z;           // per post
  std::vector<int> b;           // per blog
  std::vector<double> pi;       // I x K, row-major
  std::vector<double> rho;      // I
  std::vector<std::uint8_t> E;  // K x T, row-major by topic
  std::vector<double> psi;      // K
  Theta theta{};

  friend bool operator==(const DrawSnapshot&, const DrawSnapshot&) = default;
};

struct PosteriorDraws {
  int K = 0, I = 0, T = 0, num_posts = 0;
  std::vector<DrawSnapshot> draws;

  std::size_t size() const noexcept { return draws.size(); }
  bool empty() const noexcept { return draws.empty(); }

  friend bool operator==(const PosteriorDraws&, const PosteriorDraws&) = default;
};

// Rows of pi sum to 1 and E is binary.
inline void check_snapshot(const DrawSnapshot& s, int K) {
  for (std::size_t r = 0; r * static_cast<std::size_t>(K) < s.pi.size(); ++r) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += s.pi[r * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)];
    if (std::abs(sum - 1.0) > 1e-9) throw AuditError("pi row " + std::to_string(r) + " sums to " + std::to_string(sum));
  }
  for (auto e : s.E)
    if (e > 1) throw AuditError("event matrix entry is not binary");
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const std::string& path, std::string_view expected_header) {
  auto in = text::open_input(path);
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != expected_header)
    throw ParseError(path + ": expected header '" + std::string(expected_header) + "'", 1);
  std::vector<std::vector<std::string>> rows;
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (text::trim(line).empty()) continue;
    std::vector<std::string> row;
    for (auto f : text::split(line, ',')) row.emplace_back(text::trim(f));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
T field_as(const std::vector<std::string>& row, std::size_t i, const std::string& path) {
  if (i >= row.size()) throw ParseError(path + ": missing column " + std::to_string(i), 0);
  if constexpr (std::is_floating_point_v<T>) {
    auto v = text::parse_double(row[i]);
    if (!v) throw ParseError(path + ": bad number '" + row[i] + "'", 0);
    return *v;
  } else {
    auto v = text::parse_int<T>(row[i]);
    if (!v) throw ParseError(path + ": bad integer '" + row[i] + "'", 0);
    return *v;
  }
}

}  // namespace detail

// One CSV per parameter family. Long format keyed by draw index, except
// theta which is one row per draw.
inline void save_draws(const std::string& dir, const PosteriorDraws& pd) {
  using text::format_double;
  auto open = [&](const char* name) { return text::open_output(dir + "/" + name); };
  {
    auto dims = open("dims.csv");
    dims << "K,I,T,posts\n" << pd.K << ',' << pd.I << ',' << pd.T << ',' << pd.num_posts << '\n';
    auto out = open("draws.csv");
    out << "draw,iteration\n";
    for (std::size_t s = 0; s < pd.size(); ++s) out << s << ',' << pd.draws[s].iteration << '\n';
  }
  {
    auto out = open("z.csv");
    out << "draw,post,z\n";
    for (std::size_t s = 0; s < pd.size(); ++s)
      for (std::size_t d = 0; d < pd.draws[s].z.size(); ++d) out << s << ',' << d << ',' << pd.draws[s].z[d] << '\n';
  }
  {
    auto out = open("b.csv");
    out << "draw,blog,b\n";
    for (std::size_t s = 0; s < pd.size(); ++s)
      for (std::size_t i = 0; i < pd.draws[s].b.size(); ++i) out << s << ',' << i << ',' << pd.draws[s].b[i] << '\n';
  }
  {
    auto out = open("pi.csv");
    out << "draw,blog,topic,value\n";
    for (std::size_t s = 0; s < pd.size(); ++s)
      for (int i = 0; i < pd.I; ++i)
        for (int k = 0; k < pd.K; ++k)
          out << s << ',' << i << ',' << k << ','
              << format_double(pd.draws[s].pi[static_cast<std::size_t>(i) * pd.K + k]) << '\n';
  }
  {
    auto out = open("rho.csv");
    out << "draw,blog,value\n";
    for (std::size_t s = 0; s < pd.size(); ++s)
      for (std::size_t i = 0; i < pd.draws[s].rho.size(); ++i)
        out << s << ',' << i << ',' << format_double(pd.draws[s].rho[i]) << '\n';
  }
  {
    auto out = open("E.csv");
    out << "draw,topic,day,value\n";
    for (std::size_t s = 0; s < pd.size(); ++s)
      for (int k = 0; k < pd.K; ++k)
        for (int t = 1; t <= pd.T; ++t)
          out << s << ',' << k << ',' << t << ','
              << int(pd.draws[s].E[static_cast<std::size_t>(k) * pd.T + (t - 1)]) << '\n';
  }
  {
    auto out = open("psi.csv");
    out << "draw,topic,value\n";
    for (std::size_t s = 0; s < pd.size(); ++s)
      for (std::size_t k = 0; k < pd.draws[s].psi.size(); ++k)
        out << s << ',' << k << ',' << format_double(pd.draws[s].psi[k]) << '\n';
  }
  {
    auto out = open("theta.csv");
    out << "draw,theta0,theta1,theta2,theta3,theta4\n";
    for (std::size_t s = 0; s < pd.size(); ++s) {
      out << s;
      for (double v : pd.draws[s].theta) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

inline PosteriorDraws load_draws(const std::string& dir) {
  PosteriorDraws pd;
  {
    const auto path = dir + "/dims.csv";
    const auto rows = detail::read_csv(path, "K,I,T,posts");
    if (rows.size() != 1) throw ParseError(path + ": expected one row", 2);
    pd.K = detail::field_as<int>(rows[0], 0, path);
    pd.I = detail::field_as<int>(rows[0], 1, path);
    pd.T = detail::field_as<int>(rows[0], 2, path);
    pd.num_posts = detail::field_as<int>(rows[0], 3, path);
  }
  {
    const auto path = dir + "/draws.csv";
    for (const auto& r : detail::read_csv(path, "draw,iteration")) {
      if (detail::field_as<std::size_t>(r, 0, path) != pd.size()) throw ParseError(path + ": draws out of order", 0);
      DrawSnapshot s;
      s.iteration = detail::field_as<int>(r, 1, path);
      s.z.assign(static_cast<std::size_t>(pd.num_posts), -1);
      s.b.assign(static_cast<std::size_t>(pd.I), -1);
      s.pi.assign(static_cast<std::size_t>(pd.I) * pd.K, 0.0);
      s.rho.assign(static_cast<std::size_t>(pd.I), 0.0);
      s.E.assign(static_cast<std::size_t>(pd.K) * pd.T, 0);
      s.psi.assign(static_cast<std::size_t>(pd.K), 0.0);
      pd.draws.push_back(std::move(s));
    }
  }
  const std::size_t n = pd.size();
  auto draw_of = [&](const std::vector<std::string>& row, const std::string& path) {
    auto s = detail::field_as<std::size_t>(row, 0, path);
    if (s >= n) throw ParseError(path + ": draw index out of range", 0);
    return s;
  };
  auto bounded = [](auto v, auto hi, const std::string& path) {
    if (v < 0 || v >= hi) throw ParseError(path + ": index out of range", 0);
    return static_cast<std::size_t>(v);
  };
  {
    const auto path = dir + "/z.csv";
    for (const auto& r : detail::read_csv(path, "draw,post,z"))
      pd.draws[draw_of(r, path)].z[bounded(detail::field_as<int>(r, 1, path), pd.num_posts, path)] =
          detail::field_as<int>(r, 2, path);
  }
  {
    const auto path = dir + "/b.csv";
    for (const auto& r : detail::read_csv(path, "draw,blog,b"))
      pd.draws[draw_of(r, path)].b[bounded(detail::field_as<int>(r, 1, path), pd.I, path)] =
          detail::field_as<int>(r, 2, path);
  }
  {
    const auto path = dir + "/pi.csv";
    for (const auto& r : detail::read_csv(path, "draw,blog,topic,value")) {
      const auto i = bounded(detail::field_as<int>(r, 1, path), pd.I, path);
      const auto k = bounded(detail::field_as<int>(r, 2, path), pd.K, path);
      pd.draws[draw_of(r, path)].pi[i * static_cast<std::size_t>(pd.K) + k] = detail::field_as<double>(r, 3, path);
    }
  }
  {
    const auto path = dir + "/rho.csv";
    for (const auto& r : detail::read_csv(path, "draw,blog,value"))
      pd.draws[draw_of(r, path)].rho[bounded(detail::field_as<int>(r, 1, path), pd.I, path)] =
          detail::field_as<double>(r, 2, path);
  }
  {
    const auto path = dir + "/E.csv";
    for (const auto& r : detail::read_csv(path, "draw,topic,day,value")) {
      const auto k = bounded(detail::field_as<int>(r, 1, path), pd.K, path);
      const auto t = bounded(detail::field_as<int>(r, 2, path) - 1, pd.T, path);
      pd.draws[draw_of(r, path)].E[k * static_cast<std::size_t>(pd.T) + t] =
          static_cast<std::uint8_t>(detail::field_as<int>(r, 3, path));
    }
  }
  {
    const auto path = dir + "/psi.csv";
    for (const auto& r : detail::read_csv(path, "draw,topic,value"))
      pd.draws[draw_of(r, path)].psi[bounded(detail::field_as<int>(r, 1, path), pd.K, path)] =
          detail::field_as<double>(r, 2, path);
  }
  {
    const auto path = dir + "/theta.csv";
    for (const auto& r : detail::read_csv(path, "draw,theta0,theta1,theta2,theta3,theta4")) {
      auto& s = pd.draws[draw_of(r, path)];
      for (std::size_t p = 0; p < kNumCovariates; ++p) s.theta[p] = detail::field_as<double>(r, p + 1, path);
    }
  }
  return pd;
}

}  // namespace dtn
