#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "lossbar/exec.hpp"
#include "lossbar/landscape.hpp"
#include "lossbar/trainer.hpp"

namespace lossbar {

// Discretised path between two fixed endpoints. points.front() and
// points.back() are never touched by step() or refine().
struct PathState {
  std::vector<ParamVector> points;

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().dim(); }
  void validate() const;  // >= 3 points, shared dimension, distinct neighbours
};

// n_interior equally spaced interior points on the segment from p to q.
PathState straight_path(const ParamVector& p, const ParamVector& q, std::size_t n_interior);

enum class RefineCriterion { None, Loss, Distance };
RefineCriterion parse_refine_criterion(const std::string& name);
std::string to_string(RefineCriterion c);

inline constexpr double kRefineThreshold = 1.2;

// Unit vector along a - b. DegenerateError when the points coincide.
ParamVector proj(const ParamVector& a, const ParamVector& b);

struct StepStats {
  std::vector<double> orth;  // |grad - tangential part| per interior point
  std::vector<double> tang;  // |tangential part| per interior point
};

// One sweep of orthogonal-gradient descent over the interior points, in index
// order: point i is moved by
//   -eta * (g - (<g,u_l> u_l + <g,u_r> u_r) / 2),   g = grad L + l2 * theta_i,
// with u_l = proj(theta_i, theta_{i-1}) using the already-moved left
// neighbour and u_r = proj(theta_{i+1}, theta_i). Gradients only depend on
// the point's own (not yet moved) position, so they are evaluated up front
// in parallel; the sweep itself is sequential.
void step_inplace(PathState& path, const ScalarField& field, double eta, double l2 = 0.0,
                  Batch batch = {}, Exec exec = Exec::serial(), StepStats* stats = nullptr);
PathState step(const PathState& path, const ScalarField& field, double eta, double l2 = 0.0,
               Batch batch = {}, Exec exec = Exec::serial());
// Serial reference: the sweep written as a single loop that evaluates each
// gradient when it reaches the point. Kept for testing the kernel above.
void step_reference(PathState& path, const ScalarField& field, double eta, double l2 = 0.0,
                    Batch batch = {});

// max over alpha of L((1-alpha) a + alpha b), divided by l_ref (> 0).
double loss_criterion(const ScalarField& field, const ParamVector& a, const ParamVector& b,
                      double l_ref, std::span<const double> alpha_grid, Batch batch = {});
// |a - b| / mu, mu > 0.
double distance_criterion(const ParamVector& a, const ParamVector& b, double mu);

struct RefineResult {
  PathState path;
  std::vector<ParamVector> banked;  // points removed from the path by this call
  bool changed = false;
};

// Point insertion. If the largest gap criterion exceeds the threshold, the
// midpoints of the two largest-criterion gaps are inserted and the two
// interior points next to the endpoints are banked, so the length is kept.
// The loss criterion normalises by the largest per-point loss on the path.
RefineResult refine(const PathState& path, const ScalarField& field, RefineCriterion criterion,
                    std::span<const double> alpha_grid, Batch batch = {},
                    double threshold = kRefineThreshold);

struct MaxLoss {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t segment = 0;
  double alpha = 0.0;  // 0 for path point `segment`; the last point is (size-2, 1)
};

// Maximum of L over the path points and the alpha-interpolated points of every
// consecutive pair. Ties go to the smallest segment, then the smallest alpha.
MaxLoss path_max_loss(const ScalarField& field, const PathState& path,
                      std::span<const double> alpha_grid, Exec exec = Exec::serial(),
                      Batch batch = {});

struct PathConfig {
  std::size_t n_points = 19;  // interior points of the initial segment
  SchedulerSpec lr = SchedulerSpec::constant(1e-2);  // m1/m2 in epochs
  double l2 = 1e-5;
  std::size_t epochs = 300;
  std::size_t refine_every = 25;  // 0 disables refinement
  RefineCriterion criterion = RefineCriterion::Distance;
  std::vector<double> alpha_grid = {0.2, 0.4, 0.6, 0.8};
  std::size_t batch_size = 0;  // 0: full batch; otherwise seeded shuffles per epoch
  std::uint64_t seed = 0;
  bool include_bank = false;  // count banked points in the reported maxima

  void validate() const;
};

struct PathTrace {
  std::vector<double> max_loss;                // [0] initial path, then one per epoch
  std::vector<std::vector<double>> orth_norm;  // [epoch][interior point], epoch mean
  std::vector<std::vector<double>> tang_norm;
  std::vector<std::size_t> refined_epochs;     // epochs (1-based) where refine moved points
};

struct PathResult {
  PathState path;       // state after the last epoch
  PathState best_path;  // the iterate with the lowest max loss (epoch 0 included)
  double best_max = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  PathTrace trace;
  std::vector<ParamVector> bank;
};

// Optimises the straight segment between p and q. Every traced iterate is a
// feasible path from p to q, so best_max is an upper estimate of the minimax
// height between the endpoints. Throws DivergenceError (epoch and point in the
// message) if the loss becomes non-finite.
PathResult optimize_path(const ScalarField& field, const ParamVector& p, const ParamVector& q,
                         const PathConfig& config, Exec exec = Exec::serial());
PathResult optimize_path(const ScalarField& field, const Minimum& p, const Minimum& q,
                         const PathConfig& config, Exec exec = Exec::serial());

}  // namespace lossbar
