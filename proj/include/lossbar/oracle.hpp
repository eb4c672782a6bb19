#pragma once

#include <cstddef>
#include <filesystem>
#include <utility>
#include <vector>

#include "lossbar/diagram.hpp"
#include "lossbar/exec.hpp"
#include "lossbar/landscape.hpp"

// Ground truth for low-dimensional landscapes. Nothing in here shares code
// with the path-optimisation pipeline it is used to check.
namespace lossbar::oracle {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Values of a field on a regular lattice, axis 0 slowest (row-major).
struct ScalarGrid {
  std::vector<double> values;
  std::vector<Interval> box;
  std::vector<std::size_t> resolution;

  std::size_t axes() const { return resolution.size(); }
  double coordinate(std::size_t axis, std::size_t i) const;
  double spacing(std::size_t axis) const;
  void validate() const;
};

// Rows are sampled in parallel when exec allows it; the result is identical
// either way.
ScalarGrid grid_sample(const ScalarField& field, const std::vector<Interval>& box,
                       const std::vector<std::size_t>& resolution, Exec exec = Exec::serial());

// Sublevel-set persistence of the lattice function. Dimension 0 by
// union-find with the elder rule (2 neighbours in 1D, 4 in 2D; ties by
// lattice index). Dimension 1 (2D grids, max_dim >= 1) by column reduction
// of the cubical complex under the lower-star filtration.
std::vector<PersistenceDiagram> sublevel_persistence(const ScalarGrid& grid, int max_dim = 1);

// Exact bottleneck distance by enumerating every partial matching. At most
// kBruteLimit finite points per side.
inline constexpr std::size_t kBruteLimit = 8;
double brute_bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b);

// <stem>.bin: raw little-endian float64 values; <stem>.json: box + resolution.
void save_grid(const ScalarGrid& grid, const std::filesystem::path& stem);
ScalarGrid load_grid(const std::filesystem::path& stem);

}  // namespace lossbar::oracle
