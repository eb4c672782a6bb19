#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lossbar/diagram.hpp"
#include "lossbar/exec.hpp"
#include "lossbar/pathopt.hpp"
#include "lossbar/trainer.hpp"

namespace lossbar {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kTieEpsilon = 1e-9;
// Minima closer than this are one minimum found twice. Descent stops at
// |grad| <= tol, which leaves each copy up to tol / curvature off the true point.
inline constexpr double kDedupRadius = 1e-3;

// s_p = [L(p), h_p] for a local minimum p.
struct Segment {
  double birth = 0.0;
  double death = kInf;
  std::size_t minimum_id = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Barcode of minima: the essential half-line of the global minimum plus one
// finite segment per other minimum.
struct Barcode {
  Segment essential;              // death == +inf
  std::vector<Segment> segments;  // finite

  void validate() const;  // ValidationError on death < birth or a misplaced essential
  friend bool operator==(const Barcode&, const Barcode&) = default;
};

PersistenceDiagram to_diagram(const Barcode& b);
Barcode ideal_barcode(double global_min);
// Bottleneck distance to the ideal single-minimum barcode at the same level,
// which works out to half the longest finite segment.
double to_score(const Barcode& b);

// Total "lower than" order on minima: increasing loss, values within eps
// of the first member of a run compare equal and are ordered by id.
// Returns indices into `losses`.
std::vector<std::size_t> level_order(const std::vector<double>& losses,
                                     const std::vector<std::size_t>& ids, double eps = kTieEpsilon);
// Sort key consistent with level_order: the loss of the run representative.
std::vector<double> level_keys(const std::vector<double>& losses,
                               const std::vector<std::size_t>& ids, double eps = kTieEpsilon);

struct BarcodeConfig {
  PathConfig path;
  double tie_epsilon = kTieEpsilon;
  double dedup_radius = kDedupRadius;
  std::size_t nearest_lower = 0;  // 0: every lower minimum; k: only the k nearest
  // h_p is the smallest height at which p connects to a lower minimum through
  // the graph of optimised paths (concatenations of paths are feasible paths
  // too). false: only the direct paths from p are used.
  bool chain_paths = true;
};

struct PairRecord {
  std::size_t from = 0;  // minimum id of the higher endpoint (path start)
  std::size_t to = 0;    // minimum id of the lower endpoint
  double max_loss = kInf;
  bool ok = false;
  std::string error;
};

struct BarcodeResult {
  Barcode barcode;
  std::vector<PairRecord> pairs;
  std::vector<std::size_t> dropped_duplicates;  // ids merged into an earlier minimum
  std::vector<std::string> warnings;
};

// Ids of the minima that survive deduplication, in level order: a minimum is
// dropped when it lies within `radius` of a lower (already kept) one.
std::vector<std::size_t> distinct_minima(const std::vector<Minimum>& minima, double radius = kDedupRadius,
                                         double tie_epsilon = kTieEpsilon);

// Barcode of minima from pairwise optimised paths. Minima are processed in
// level_order; for each p, a path is optimised to every lower q and h_p is
// the minimal path maximum. Minima ids are their positions in `minima`.
// Pairs whose optimisation fails are skipped with a warning; if some
// non-global minimum ends up with no lower connection at all a
// DivergenceError is thrown.
BarcodeResult compute_barcode(const std::vector<Minimum>& minima, const ScalarField& field,
                              const BarcodeConfig& config, Exec exec = Exec::serial());

}  // namespace lossbar
