#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lossbar {

// Row-major feature matrix plus integer class labels. Immutable after load.
struct Dataset {
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<double> features;  // n_samples * n_features
  std::vector<std::size_t> labels;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features, n_features};
  }
  void validate() const;  // ValidationError if the invariants do not hold
};

// CSV with a header row `f0,...,fk,label`. n_classes == 0 infers it as
// max(label) + 1 (at least 2); otherwise labels must be below it.
Dataset load_dataset(const std::filesystem::path& path, std::size_t n_classes = 0);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

// Two interleaved half circles, the usual two-moons benchmark. Classes
// alternate so any prefix is balanced.
Dataset make_two_moons(std::size_t n_samples, double noise, std::uint64_t seed);

}  // namespace lossbar
