#pragma once

// Flat `key = value` configuration files and the run manifests written
// beside every CLI artifact.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mwl {

/// Ordered key -> value map; ordering makes serialized text byte-stable.
class FlatConfig {
 public:
  FlatConfig() = default;
  explicit FlatConfig(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

  /// `key = value` per line; blank lines and `#` comments are skipped.
  static FlatConfig parse(const std::string& text);
  static FlatConfig load(const std::filesystem::path& path);
  std::string dump() const;

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value) { entries_[key] = std::to_string(value); }
  void set(const std::string& key, int value) { entries_[key] = std::to_string(value); }
  void erase(const std::string& key) { entries_.erase(key); }
  void merge(const FlatConfig& other);

  std::string get(const std::string& key, const std::string& fallback) const;
  std::optional<std::string> find(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated integers.
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Lower-case hex SHA-256 of a byte string or a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Everything needed to rerun a CLI invocation. Config keys are stored
/// verbatim; bookkeeping keys live under the `manifest.`, `input.` and
/// `output.` prefixes so a manifest can be passed back as a config file.
struct RunManifest {
  std::string version;
  std::string subcommand;
  FlatConfig config;
  std::uint64_t seed = 0;
  /// file name -> content hash.
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  std::string timestamp;

  std::string dump() const;
  static RunManifest parse(const FlatConfig& flat);
  /// True for keys that carry bookkeeping rather than configuration.
  static bool bookkeeping_key(const std::string& key);
};

/// Strips bookkeeping keys so only the configuration remains.
FlatConfig config_part(const FlatConfig& flat);

std::string utc_timestamp();

}  // namespace mwl
