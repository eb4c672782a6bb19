#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "lossbar/barcode.hpp"
#include "lossbar/diagram.hpp"
#include "lossbar/exec.hpp"
#include "lossbar/pathopt.hpp"
#include "lossbar/trainer.hpp"

namespace lossbar {

// An r-simplex on sampled minima after gradient-flow optimisation.
//
// Sample layout: r = 0 one point; r = 1 the grid_depth + 1 points of the
// path from the lower to the higher vertex id; r = 2 the barycentric grid
// (a, b, c), a + b + c = grid_depth, stored at tri_index(depth, b, c) where
// a, b, c weight vertex_ids[0], [1], [2].
struct SampledSimplex {
  int r = 0;
  std::vector<std::size_t> vertex_ids;  // sorted
  std::size_t grid_depth = 0;
  std::vector<ParamVector> sample_points;
  double filtration_value = 0.0;
  // Per epoch, epoch 0 first: the simplex value and (r = 2) the maximum over
  // the grid points off the sides, which the faces do not bound.
  std::vector<double> trace;
  std::vector<double> interior_trace;
};

std::size_t tri_index(std::size_t depth, std::size_t b, std::size_t c);
std::size_t tri_point_count(std::size_t depth);

struct MorseConfig {
  PathConfig path;             // step schedule, l2, epochs, refinement, alpha grid
  std::size_t grid_depth = 0;  // 0: 8 for a 1-skeleton, 6 when triangles are built
};

// Max loss over the sample points and the alpha-interpolations along every
// grid edge of the simplex. For r = 2 this includes the faces' own values.
double simplex_max_loss(const ScalarField& field, const SampledSimplex& s,
                        std::span<const double> alpha_grid,
                        const std::vector<const SampledSimplex*>& faces = {});

// r = |vertices| - 1 in {1, 2}. For r = 1 this is optimize_path with
// grid_depth - 1 interior points. For r = 2 the edges are optimised first
// (or taken from `faces`, ordered (v0,v1), (v0,v2), (v1,v2)) and frozen; the
// interior grid starts on the affine triangle and moves by the gradient
// component normal to the local tangent plane, estimated from each point's six
// grid neighbours. The lowest-filtration iterate is returned.
SampledSimplex optimize_simplex(const ScalarField& field,
                                const std::vector<std::pair<std::size_t, Minimum>>& vertices,
                                std::size_t grid_depth, const PathConfig& config,
                                const std::vector<const SampledSimplex*>& faces = {},
                                Exec exec = Exec::serial());

struct Simplex {
  std::vector<std::size_t> vertices;  // sorted vertex labels
  double value = 0.0;
};

// Columns of a mod-2 boundary matrix: sorted row indices of non-zero entries.
using BoundaryMatrix = std::vector<std::vector<std::size_t>>;

// Simplicial complex with a filtration value per simplex.
class FiltrationComplex {
 public:
  // Faces must already be present (vertices have none).
  void add(std::vector<std::size_t> vertices, double value);

  int max_dim() const { return static_cast<int>(by_dim_.size()) - 1; }
  const std::vector<Simplex>& simplices(int dim) const;
  std::size_t index_of(const std::vector<std::size_t>& vertices) const;

  // Mod-2 boundary operator from dimension r to r - 1 (r >= 1).
  BoundaryMatrix boundary(int r) const;

  // Raises every value to at least the maximum over its faces; returns the
  // number of simplices changed.
  std::size_t clamp_monotone();
  bool monotone() const;

  std::size_t clamp_count = 0;
  std::vector<SampledSimplex> sampled;  // kept by build_complex for output

 private:
  std::vector<std::vector<Simplex>> by_dim_;
  std::map<std::vector<std::size_t>, std::size_t> index_;
};

// (lower o upper) over Z/2: lower maps dim r-1 -> r-2, upper maps r -> r-1.
BoundaryMatrix compose(const BoundaryMatrix& lower, const BoundaryMatrix& upper);

// Full r_max-skeleton of the simplex on all minima (ids are positions in
// `minima`), each simplex optimised with its faces frozen.
FiltrationComplex build_complex(const std::vector<Minimum>& minima, const ScalarField& field,
                                int r_max, const MorseConfig& config, Exec exec = Exec::serial());

// 1-skeleton with given vertex and edge values (no optimisation).
FiltrationComplex complex_from_values(const std::vector<std::pair<std::size_t, double>>& vertices,
                                      const std::vector<Simplex>& edges);

// Standard persistence column reduction over Z/2. Vertices are ordered like
// level_order (ties within tie_epsilon by label); higher simplices by value,
// then dimension, then vertex labels. One diagram per dimension 0..max_dim.
// ValidationError if a face enters after one of its cofaces.
std::vector<PersistenceDiagram> reduce(const FiltrationComplex& complex,
                                       double tie_epsilon = kTieEpsilon);

// Index-r TO-score. r = 0: bottleneck distance to the ideal diagram with a
// single essential class at the global minimum. r >= 1: half the longest
// finite dimension-r bar; essential classes in the top dimension come from
// truncating the complex and are not scored.
double index_r_to_score(const std::vector<PersistenceDiagram>& diagrams, int r);

}  // namespace lossbar
