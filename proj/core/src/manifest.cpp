#include "mwl/config.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "mwl/errors.hpp"
#include "mwl/grid.hpp"

namespace mwl {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

constexpr const char* kPrefixes[] = {"manifest.", "input.", "output."};

}  // namespace

FlatConfig FlatConfig::parse(const std::string& text) {
  FlatConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.entries_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string FlatConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

void FlatConfig::set(const std::string& key, double value) { entries_[key] = format_double(value); }

void FlatConfig::merge(const FlatConfig& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::optional<std::string> FlatConfig::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string FlatConfig::get(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double x = std::stod(*v, &used);
    if (used == v->size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects a number, got '" + *v + "'");
}

long long FlatConfig::get_int(const std::string& key, long long fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long long x = std::stoll(*v, &used);
    if (used == v->size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects an integer, got '" + *v + "'");
}

std::uint64_t FlatConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    if (!v->empty() && v->front() != '-') {
      const auto x = std::stoull(*v, &used);
      if (used == v->size()) return x;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects an unsigned integer, got '" + *v + "'");
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes") return true;
  if (*v == "0" || *v == "false" || *v == "no") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + *v + "'");
}

std::vector<int> FlatConfig::get_int_list(const std::string& key, const std::vector<int>& fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  std::vector<int> out;
  std::istringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const std::string t = trim(item);
      out.push_back(std::stoi(t, &used));
      if (used != t.size()) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' expects a comma-separated integer list, got '" + *v + "'");
    }
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

bool RunManifest::bookkeeping_key(const std::string& key) {
  for (const char* p : kPrefixes) {
    if (key.rfind(p, 0) == 0) return true;
  }
  return false;
}

FlatConfig config_part(const FlatConfig& flat) {
  std::map<std::string, std::string> kept;
  for (const auto& [k, v] : flat.entries()) {
    if (!RunManifest::bookkeeping_key(k)) kept[k] = v;
  }
  return FlatConfig(std::move(kept));
}

std::string RunManifest::dump() const {
  FlatConfig flat = config;
  flat.set("manifest.version", version);
  flat.set("manifest.subcommand", subcommand);
  flat.set("manifest.seed", std::to_string(seed));
  flat.set("manifest.timestamp", timestamp);
  for (const auto& [name, hash] : inputs) flat.set("input." + name, hash);
  for (const auto& [name, hash] : outputs) flat.set("output." + name, hash);
  return flat.dump();
}

RunManifest RunManifest::parse(const FlatConfig& flat) {
  RunManifest m;
  m.config = config_part(flat);
  m.version = flat.get("manifest.version", "");
  m.subcommand = flat.get("manifest.subcommand", "");
  m.seed = flat.get_u64("manifest.seed", 0);
  m.timestamp = flat.get("manifest.timestamp", "");
  for (const auto& [k, v] : flat.entries()) {
    if (k.rfind("input.", 0) == 0) m.inputs[k.substr(6)] = v;
    if (k.rfind("output.", 0) == 0) m.outputs[k.substr(7)] = v;
  }
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mwl
