#include "lossbar/pathopt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lossbar/error.hpp"

namespace lossbar {

namespace {

constexpr double kMinSpacing = 1e-12;

void check_alpha_grid(std::span<const double> alpha_grid) {
  for (double a : alpha_grid)
    if (!(a > 0.0 && a < 1.0)) throw ValidationError("alpha grid values must lie in (0, 1)");
}

std::vector<double> sorted_grid(std::span<const double> alpha_grid) {
  std::vector<double> g(alpha_grid.begin(), alpha_grid.end());
  std::sort(g.begin(), g.end());
  return g;
}

// g - (gl + gr) / 2 applied to point c with step eta; identical arithmetic in
// the kernel and the reference so the two agree bit for bit.
void sweep_point(ParamVector& c, const ParamVector& left, const ParamVector& right,
                 const ParamVector& g, double eta, double* orth_norm, double* tang_norm) {
  const ParamVector ul = proj(c, left);
  const ParamVector ur = proj(right, c);
  const double sl = dot(g, ul);
  const double sr = dot(g, ur);
  double on = 0.0, tn = 0.0;
  for (std::size_t k = 0; k < c.dim(); ++k) {
    const double tang = (sl * ul[k] + sr * ur[k]) / 2.0;
    const double orth = g[k] - tang;
    c[k] = c[k] - eta * orth;
    on += orth * orth;
    tn += tang * tang;
  }
  if (orth_norm) *orth_norm = std::sqrt(on);
  if (tang_norm) *tang_norm = std::sqrt(tn);
}

ParamVector point_gradient(const ScalarField& field, const ParamVector& theta, double l2,
                           Batch batch, std::size_t index) {
  ParamVector g(theta.dim());
  field.gradient(theta.span(), g.span(), batch);
  if (!g.is_finite() || !theta.is_finite())
    throw DivergenceError(field.name() + ": non-finite gradient at path point " +
                              std::to_string(index),
                          index);
  if (l2 > 0.0)
    for (std::size_t k = 0; k < g.dim(); ++k) g[k] += l2 * theta[k];
  return g;
}

}  // namespace

void PathState::validate() const {
  if (points.size() < 3) throw ValidationError("a path needs at least 3 points");
  const std::size_t d = points.front().dim();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != d) throw DimensionError(d, points[i].dim());
    if (i > 0 && distance(points[i], points[i - 1]) <= kMinSpacing)
      throw ValidationError("path points " + std::to_string(i - 1) + " and " + std::to_string(i) +
                            " coincide");
  }
}

PathState straight_path(const ParamVector& p, const ParamVector& q, std::size_t n_interior) {
  PathState path;
  path.points.reserve(n_interior + 2);
  path.points.push_back(p);
  for (std::size_t k = 1; k <= n_interior; ++k)
    path.points.push_back(lerp(p, q, static_cast<double>(k) / static_cast<double>(n_interior + 1)));
  path.points.push_back(q);
  return path;
}

RefineCriterion parse_refine_criterion(const std::string& name) {
  if (name == "none") return RefineCriterion::None;
  if (name == "loss") return RefineCriterion::Loss;
  if (name == "distance") return RefineCriterion::Distance;
  throw ValidationError("unknown refine criterion '" + name + "'");
}

std::string to_string(RefineCriterion c) {
  switch (c) {
    case RefineCriterion::None: return "none";
    case RefineCriterion::Loss: return "loss";
    case RefineCriterion::Distance: return "distance";
  }
  return "?";
}

ParamVector proj(const ParamVector& a, const ParamVector& b) {
  if (a.dim() != b.dim()) throw DimensionError(a.dim(), b.dim());
  ParamVector d = a - b;
  const double len = norm(d);
  if (!(len > kMinSpacing)) throw DegenerateError("degenerate chord: coincident points");
  for (double& c : d) c /= len;
  return d;
}

void step_inplace(PathState& path, const ScalarField& field, double eta, double l2, Batch batch,
                  Exec exec, StepStats* stats) {
  const std::size_t n = path.size();
  if (n < 3) throw ValidationError("a path needs at least 3 points");
  if (!(eta >= 0.0)) throw ValidationError("step size must be non-negative");
  const std::size_t m = n - 2;

  std::vector<ParamVector> grads(m);
  for_each_index(exec, m, [&](std::size_t j) {
    grads[j] = point_gradient(field, path.points[j + 1], l2, batch, j + 1);
  });

  if (stats) {
    stats->orth.assign(m, 0.0);
    stats->tang.assign(m, 0.0);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    try {
      sweep_point(path.points[i], path.points[i - 1], path.points[i + 1], grads[i - 1], eta,
                  stats ? &stats->orth[i - 1] : nullptr, stats ? &stats->tang[i - 1] : nullptr);
    } catch (const DegenerateError& e) {
      throw DegenerateError(std::string(e.what()) + " at path point " + std::to_string(i));
    }
  }
}

PathState step(const PathState& path, const ScalarField& field, double eta, double l2,
               Batch batch, Exec exec) {
  PathState out = path;
  step_inplace(out, field, eta, l2, batch, exec);
  return out;
}

void step_reference(PathState& path, const ScalarField& field, double eta, double l2,
                    Batch batch) {
  std::size_t i = 1;
  while (i < path.size() - 1) {
    const ParamVector g = point_gradient(field, path.points[i], l2, batch, i);
    sweep_point(path.points[i], path.points[i - 1], path.points[i + 1], g, eta, nullptr, nullptr);
    ++i;
  }
}

double loss_criterion(const ScalarField& field, const ParamVector& a, const ParamVector& b,
                      double l_ref, std::span<const double> alpha_grid, Batch batch) {
  if (!(l_ref > 0.0)) throw ValidationError("loss criterion needs a positive reference loss");
  check_alpha_grid(alpha_grid);
  double best = -std::numeric_limits<double>::infinity();
  for (double alpha : alpha_grid) best = std::max(best, eval_loss(field, lerp(a, b, alpha), batch));
  return best / l_ref;
}

double distance_criterion(const ParamVector& a, const ParamVector& b, double mu) {
  if (!(mu > 0.0)) throw ValidationError("distance criterion needs mu > 0");
  return distance(a, b) / mu;
}

RefineResult refine(const PathState& path, const ScalarField& field, RefineCriterion criterion,
                    std::span<const double> alpha_grid, Batch batch, double threshold) {
  const std::size_t n = path.size();
  if (n < 4) throw ValidationError("refine needs a path of at least 4 points");
  RefineResult result{path, {}, false};
  if (criterion == RefineCriterion::None) return result;

  std::vector<double> gaps(n - 1);
  if (criterion == RefineCriterion::Distance) {
    const double mu = distance(path.points.back(), path.points.front()) / static_cast<double>(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
      gaps[i] = distance_criterion(path.points[i], path.points[i + 1], mu);
  } else {
    double l_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : path.points) l_max = std::max(l_max, eval_loss(field, p, batch));
    if (!(l_max > 0.0))
      throw ValidationError("loss criterion is a ratio to the largest path loss, which must be "
                            "positive here; use the distance criterion");
    for (std::size_t i = 0; i + 1 < n; ++i)
      gaps[i] = loss_criterion(field, path.points[i], path.points[i + 1], l_max, alpha_grid, batch);
  }

  const auto first = std::max_element(gaps.begin(), gaps.end());
  if (!(*first > threshold)) return result;
  const std::size_t max1 = static_cast<std::size_t>(first - gaps.begin());
  std::size_t max2 = max1 == 0 ? 1 : 0;
  for (std::size_t i = 0; i < gaps.size(); ++i)
    if (i != max1 && gaps[i] > gaps[max2]) max2 = i;

  std::vector<ParamVector> grown;
  grown.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    grown.push_back(path.points[i]);
    if (i == max1 || i == max2) {
      const ParamVector& a = path.points[i];
      const ParamVector& b = path.points[i + 1];
      ParamVector mid(a.dim());
      for (std::size_t k = 0; k < a.dim(); ++k) mid[k] = (a[k] + b[k]) / 2.0;
      grown.push_back(std::move(mid));
    }
  }
  // Bank the interior neighbours of the two endpoints; the minima stay put.
  result.banked.push_back(grown[1]);
  result.banked.push_back(grown[grown.size() - 2]);
  grown.erase(grown.end() - 2);
  grown.erase(grown.begin() + 1);
  result.path.points = std::move(grown);
  result.changed = true;
  return result;
}

MaxLoss path_max_loss(const ScalarField& field, const PathState& path,
                      std::span<const double> alpha_grid, Exec exec, Batch batch) {
  if (path.size() < 2) throw ValidationError("a path needs at least 2 points");
  check_alpha_grid(alpha_grid);
  const std::vector<double> grid = sorted_grid(alpha_grid);

  struct Sample {
    std::size_t segment;
    double alpha;
  };
  std::vector<Sample> samples;
  const std::size_t segments = path.size() - 1;
  samples.reserve(segments * (grid.size() + 1) + 1);
  for (std::size_t s = 0; s < segments; ++s) {
    samples.push_back({s, 0.0});
    for (double a : grid) samples.push_back({s, a});
  }
  samples.push_back({segments - 1, 1.0});

  std::vector<double> values(samples.size());
  for_each_index(exec, samples.size(), [&](std::size_t k) {
    const auto& s = samples[k];
    const ParamVector* point = nullptr;
    ParamVector tmp;
    if (s.alpha == 0.0) {
      point = &path.points[s.segment];
    } else if (s.alpha == 1.0) {
      point = &path.points[s.segment + 1];
    } else {
      tmp = lerp(path.points[s.segment], path.points[s.segment + 1], s.alpha);
      point = &tmp;
    }
    values[k] = field.value(point->span(), batch);
  });

  MaxLoss best;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (!std::isfinite(values[k]))
      throw NonFiniteError(field.name() + ": non-finite loss on path segment " +
                           std::to_string(samples[k].segment));
    if (values[k] > best.value) best = {values[k], samples[k].segment, samples[k].alpha};
  }
  return best;
}

void PathConfig::validate() const {
  if (n_points < 3) throw ValidationError("path needs at least 3 interior points");
  lr.validate();
  if (!(l2 >= 0.0)) throw ValidationError("l2 penalty must be non-negative");
  check_alpha_grid(alpha_grid);
}

PathResult optimize_path(const ScalarField& field, const ParamVector& p, const ParamVector& q,
                         const PathConfig& config, Exec exec) {
  config.validate();
  if (p.dim() != field.dim()) throw DimensionError(field.dim(), p.dim());
  if (q.dim() != field.dim()) throw DimensionError(field.dim(), q.dim());
  if (!(distance(p, q) > kMinSpacing)) throw ValidationError("path endpoints must be distinct");

  PathResult result;
  result.path = straight_path(p, q, config.n_points);

  // Mini-batch plan: seeded reshuffle of the dataset every epoch.
  const std::size_t samples = field.sample_count();
  const bool minibatch = config.batch_size > 0 && samples > 0 && config.batch_size < samples;
  const std::size_t steps_per_epoch =
      minibatch ? (samples + config.batch_size - 1) / config.batch_size : 1;
  SchedulerSpec lr = config.lr;
  lr.batches_per_epoch = steps_per_epoch;

  auto traced_max = [&](const PathState& path, std::size_t epoch) {
    double v;
    try {
      v = path_max_loss(field, path, config.alpha_grid, exec).value;
      if (config.include_bank)
        for (const auto& b : result.bank) v = std::max(v, field.value(b.span()));
    } catch (const NonFiniteError& e) {
      throw DivergenceError(std::string(e.what()) + " after epoch " + std::to_string(epoch), epoch);
    }
    if (!std::isfinite(v))
      throw DivergenceError(field.name() + ": non-finite path loss after epoch " +
                                std::to_string(epoch),
                            epoch);
    return v;
  };

  result.best_max = traced_max(result.path, 0);
  result.best_path = result.path;
  result.trace.max_loss.push_back(result.best_max);

  const std::size_t m = result.path.size() - 2;
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  StepStats stats;
  std::size_t global_step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (minibatch) {
      std::mt19937_64 rng(mix_seed(config.seed, epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<double> orth(m, 0.0), tang(m, 0.0);
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++global_step) {
      Batch batch;
      if (minibatch) {
        const std::size_t lo = s * config.batch_size;
        batch = Batch(order).subspan(lo, std::min(config.batch_size, samples - lo));
      }
      const double eta = schedule_lr(lr, global_step);
      try {
        step_inplace(result.path, field, eta, config.l2, batch, exec, &stats);
      } catch (const DivergenceError& e) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ": " + e.what(), global_step);
      }
      for (std::size_t j = 0; j < m; ++j) {
        orth[j] += stats.orth[j] / static_cast<double>(steps_per_epoch);
        tang[j] += stats.tang[j] / static_cast<double>(steps_per_epoch);
      }
    }
    result.trace.orth_norm.push_back(std::move(orth));
    result.trace.tang_norm.push_back(std::move(tang));

    if (config.refine_every > 0 && epoch % config.refine_every == 0 && result.path.size() >= 4) {
      auto r = refine(result.path, field, config.criterion, config.alpha_grid);
      if (r.changed) {
        result.path = std::move(r.path);
        for (auto& b : r.banked) result.bank.push_back(std::move(b));
        result.trace.refined_epochs.push_back(epoch);
      }
    }

    const double v = traced_max(result.path, epoch);
    result.trace.max_loss.push_back(v);
    if (v < result.best_max) {
      result.best_max = v;
      result.best_path = result.path;
      result.best_epoch = epoch;
    }
  }
  return result;
}

PathResult optimize_path(const ScalarField& field, const Minimum& p, const Minimum& q,
                         const PathConfig& config, Exec exec) {
  return optimize_path(field, p.params, q.params, config, exec);
}

}  // namespace lossbar
