#pragma once

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dtn/config.hpp"
#include "dtn/error.hpp"
#include "dtn/sampler.hpp"
#include "dtn/text.hpp"
#include "json.hpp"

namespace dtn {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

// Hex SHA-256 of a file's bytes.
inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// What a command read, wrote and how it was configured. Written as
// manifest.json in the command's output directory.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // name relative to out dir -> sha256
  std::string started, finished;
  double wall_seconds = 0.0;
  std::string version = kVersion;
  std::map<std::string, std::array<long, 2>> acceptance;  // family -> (proposed, accepted)
  nlohmann::json extra = nlohmann::json::object();

  void record_input(const std::string& path) { inputs[path] = sha256_file(path); }

  void set_config(const ModelConfig& c) {
    config.clear();
    for (auto& [k, v] : config_entries(c)) config[k] = v;
  }

  void set_acceptance(const AcceptanceTable& a) {
    acceptance["pi"] = {a.pi.proposed, a.pi.accepted};
    acceptance["rho"] = {a.rho.proposed, a.rho.accepted};
    acceptance["E"] = {a.E.proposed, a.E.accepted};
    acceptance["psi"] = {a.psi.proposed, a.psi.accepted};
    for (std::size_t p = 0; p < a.theta.size(); ++p)
      acceptance["theta" + std::to_string(p)] = {a.theta[p].proposed, a.theta[p].accepted};
  }
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json acc = nlohmann::json::object();
  for (auto& [k, v] : m.acceptance)
    acc[k] = {{"proposed", v[0]}, {"accepted", v[1]}, {"rate", v[0] ? double(v[1]) / double(v[0]) : 0.0}};
  return {{"command", m.command}, {"argv", m.argv},         {"config", m.config},       {"seed", m.seed},
          {"inputs", m.inputs},   {"outputs", m.outputs},   {"started", m.started},     {"finished", m.finished},
          {"wall_seconds", m.wall_seconds},                 {"version", m.version},     {"acceptance", acc},
          {"extra", m.extra}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.argv = j.value("argv", std::vector<std::string>{});
    m.config = j.value("config", std::map<std::string, std::string>{});
    m.seed = j.value("seed", std::uint64_t{0});
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    m.wall_seconds = j.value("wall_seconds", 0.0);
    m.version = j.value("version", "");
    if (j.contains("acceptance"))
      for (auto& [k, v] : j.at("acceptance").items())
        m.acceptance[k] = {v.at("proposed").get<long>(), v.at("accepted").get<long>()};
    m.extra = j.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), 0);
  }
  return m;
}

// Hashes every regular file in `dir` except the manifest itself, then writes
// the manifest there.
inline void write_manifest(const std::string& dir, RunManifest m) {
  namespace fs = std::filesystem;
  m.outputs.clear();
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (e.path().filename() == kManifestName) continue;
    m.outputs[rel] = sha256_file(e.path().string());
  }
  auto out = text::open_output(dir + "/" + kManifestName);
  out << to_json(m).dump(2) << '\n';
}

inline RunManifest load_manifest(const std::string& path) {
  auto in = text::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  return manifest_from_json(j);
}

// If `path` was written by an earlier command (its directory carries a
// manifest listing it), the file must still match the recorded digest.
// Returns false when there is no manifest to check against.
inline bool verify_against_producer(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  const fs::path mpath = dir / kManifestName;
  if (!fs::exists(mpath)) return false;
  const auto m = load_manifest(mpath.string());
  auto it = m.outputs.find(p.filename().generic_string());
  if (it == m.outputs.end()) return false;
  if (sha256_file(path) != it->second)
    throw AuditError(path + " changed since it was written by '" + m.command + "' (digest mismatch)");
  return true;
}

// Recorded input digests that no longer match the files on disk.
inline std::vector<std::string> changed_inputs(const RunManifest& m) {
  std::vector<std::string> changed;
  for (auto& [path, digest] : m.inputs) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec) || sha256_file(path) != digest) changed.push_back(path);
  }
  return changed;
}

}  // namespace dtn
