#include "lossbar/trainer.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "lossbar/error.hpp"

namespace lossbar {

void SchedulerSpec::validate() const {
  if (!(m1 >= 0.0)) throw ValidationError("scheduler m1 must be >= 0");
  if (!(m2 >= m1)) throw ValidationError("scheduler m2 must be >= m1");
  if (!(lr_max >= 0.0)) throw ValidationError("scheduler lr_max must be >= 0");
  if (!(lr_min > 0.0)) throw ValidationError("scheduler lr_min must be > 0");
  if (batches_per_epoch == 0) throw ValidationError("scheduler batches_per_epoch must be positive");
}

double schedule_lr(const SchedulerSpec& spec, std::size_t batch_index) {
  const double batch = static_cast<double>(batch_index);
  const double per_epoch = static_cast<double>(spec.batches_per_epoch);
  const double lo = per_epoch * spec.m1;
  const double hi = per_epoch * spec.m2;
  // The tail branch is checked first: with m1 == m2 both end conditions hold
  // at the breakpoint, and the constant-rate form S(0, 0, 0, lr) must give lr
  // from the very first batch.
  if (batch >= hi) return spec.lr_min;
  if (batch <= lo) return spec.lr_max;
  const double delta = (batch - lo) / (per_epoch * (spec.m2 - spec.m1));
  return (1.0 - delta) * spec.lr_max + delta * spec.lr_min;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over a ^ golden-ratio-scaled b
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Minimum find_minimum(const ScalarField& field, const ParamVector& init, const TrainConfig& config) {
  if (init.dim() != field.dim()) throw DimensionError(field.dim(), init.dim());
  if (!(config.tol > 0.0)) throw ValidationError("convergence tolerance must be positive");
  config.scheduler.validate();

  const std::size_t n = field.dim();
  ParamVector theta = init;
  ParamVector velocity(n), grad(n);
  Minimum best;
  best.loss = std::numeric_limits<double>::infinity();

  for (std::size_t step = 0;; ++step) {
    Batch batch;
    if (!config.batches.empty()) batch = config.batches[step % config.batches.size()];
    const double loss = field.value_and_gradient(theta.span(), grad.span(), batch);
    if (!std::isfinite(loss) || !grad.is_finite() || !theta.is_finite())
      throw DivergenceError(field.name() + ": non-finite loss during descent", step);
    if (config.loss_trace) config.loss_trace->push_back(loss);
    const double gnorm = norm(grad);
    if (loss < best.loss) {
      best.params = theta;
      best.loss = loss;
      best.grad_norm = gnorm;
      best.steps = step;
    }
    if (gnorm <= config.tol) {
      Minimum m;
      m.params = theta;
      m.loss = config.batches.empty() ? loss : field.value(theta.span());
      m.grad_norm = gnorm;
      m.steps = step;
      m.converged = true;
      m.tol = config.tol;
      return m;
    }
    if (step >= config.max_steps) break;
    const double lr = schedule_lr(config.scheduler, step);
    for (std::size_t i = 0; i < n; ++i) {
      velocity[i] = config.momentum * velocity[i] + grad[i];
      theta[i] -= lr * velocity[i];
    }
  }
  if (!config.batches.empty()) best.loss = field.value(best.params.span());
  best.converged = false;
  best.tol = config.tol;
  return best;
}

std::vector<Minimum> sample_minima(const ScalarField& field, std::size_t count,
                                   std::uint64_t seed, double init_scale,
                                   const TrainConfig& config, Exec exec) {
  if (count == 0) throw ValidationError("minima count must be at least 1");
  if (!(init_scale > 0.0)) throw ValidationError("init_scale must be positive");
  constexpr int kRetries = 3;

  std::vector<Minimum> out(count);
  TrainConfig slot_config = config;
  slot_config.loss_trace = nullptr;
  for_each_index(exec, count, [&](std::size_t slot) {
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t s = mix_seed(mix_seed(seed, slot), static_cast<std::uint64_t>(attempt));
      std::mt19937_64 rng(s);
      std::uniform_real_distribution<double> coord(-init_scale, init_scale);
      ParamVector init(field.dim());
      for (double& c : init) c = coord(rng);
      try {
        out[slot] = find_minimum(field, init, slot_config);
        out[slot].seed = s;
        return;
      } catch (const DivergenceError&) {
        if (attempt >= kRetries) throw;
      }
    }
  });
  return out;
}

}  // namespace lossbar
