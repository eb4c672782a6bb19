#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lossbar/exec.hpp"
#include "lossbar/landscape.hpp"

namespace lossbar {

// Piecewise-linear learning-rate schedule over the global batch counter:
// lr_max up to batches_per_epoch * m1, then a linear ramp to lr_min, reached
// at batches_per_epoch * m2 and held afterwards. m1 and m2 are in epochs.
struct SchedulerSpec {
  double m1 = 0.0;
  double m2 = 0.0;
  double lr_max = 0.0;
  double lr_min = 1e-2;
  std::size_t batches_per_epoch = 1;

  static SchedulerSpec constant(double lr, std::size_t batches_per_epoch = 1) {
    return {0.0, 0.0, 0.0, lr, batches_per_epoch};
  }
  void validate() const;
};

double schedule_lr(const SchedulerSpec& spec, std::size_t batch_index);

struct Minimum {
  ParamVector params;
  double loss = 0.0;
  double grad_norm = 0.0;
  double tol = 0.0;  // tolerance the descent was run with
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  bool converged = false;
};

struct TrainConfig {
  SchedulerSpec scheduler = SchedulerSpec::constant(0.05);
  double momentum = 0.9;
  std::size_t max_steps = 20000;
  double tol = 1e-6;  // on the gradient norm
  // Optional explicit mini-batches, used cyclically by step index. Empty means
  // full-batch gradients.
  std::vector<std::vector<std::size_t>> batches;
  // When set, receives the loss of every iterate.
  std::vector<double>* loss_trace = nullptr;
};

// SGD with heavy-ball momentum (v <- nu v + g; theta <- theta - lr v) until
// |grad| <= tol. When max_steps runs out the lowest-loss iterate is returned
// with converged == false. Throws DivergenceError on a non-finite loss.
Minimum find_minimum(const ScalarField& field, const ParamVector& init, const TrainConfig& config);

// `count` minima from seeded uniform initialisations in
// [-init_scale, init_scale]^dim. A diverging initialisation is redrawn up to
// three times before the error propagates. Slots train independently.
std::vector<Minimum> sample_minima(const ScalarField& field, std::size_t count,
                                   std::uint64_t seed, double init_scale,
                                   const TrainConfig& config, Exec exec = Exec::serial());

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace lossbar
