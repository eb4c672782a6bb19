#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lossbar/barcode.hpp"
#include "lossbar/dataset.hpp"
#include "lossbar/landscape.hpp"
#include "lossbar/mlp.hpp"
#include "lossbar/morse.hpp"
#include "lossbar/oracle.hpp"
#include "lossbar/pathopt.hpp"
#include "lossbar/trainer.hpp"

namespace lossbar {

// Run configuration from a `key = value` file. '#' starts a comment. Unknown
// keys, repeated keys and malformed values raise ConfigError naming the key.
// Relative paths are resolved against the directory of the file.
class RunConfig {
 public:
  RunConfig() = default;
  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir = ".");
  static RunConfig load(const std::filesystem::path& file);

  // Overrides or adds one entry (values are checked like file entries).
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;  // >= 0
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) const;
  std::filesystem::path path(const std::string& key) const;  // resolved; ConfigError if absent

  std::uint64_t seed() const;
  const std::filesystem::path& base_dir() const { return base_dir_; }

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_ = ".";
};

// Builders for the pipeline pieces. All throw ConfigError on bad values.
FieldPtr field_from_config(const RunConfig& c, Exec exec = Exec::serial());
// Dataset named by `dataset` (CSV) or `dataset_generate`.
std::shared_ptr<const Dataset> dataset_from_config(const RunConfig& c);
// MLP field for an explicit architecture; activation and batch from the config.
FieldPtr mlp_field_from_config(const RunConfig& c, const MlpSpec& spec,
                               std::shared_ptr<const Dataset> data, Exec exec = Exec::serial());
TrainConfig train_config(const RunConfig& c);
PathConfig path_config(const RunConfig& c);
BarcodeConfig barcode_config(const RunConfig& c);
MorseConfig morse_config(const RunConfig& c);

struct OracleSettings {
  std::vector<oracle::Interval> box;
  std::vector<std::size_t> resolution;
};
OracleSettings oracle_settings(const RunConfig& c, std::size_t dim);

}  // namespace lossbar
