#include "lossbar/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lossbar/error.hpp"

namespace lossbar {

namespace {

std::string describe_point(const ParamVector& theta) {
  std::ostringstream os;
  os << "(";
  const std::size_t shown = std::min<std::size_t>(theta.dim(), 6);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << theta[i];
  if (shown < theta.dim()) os << ", ... [" << theta.dim() << " coords]";
  os << ")";
  return os.str();
}

void check_input(const ScalarField& field, const ParamVector& theta) {
  if (theta.dim() != field.dim()) throw DimensionError(field.dim(), theta.dim());
  if (!theta.is_finite())
    throw NonFiniteError(field.name() + ": non-finite parameter vector " + describe_point(theta));
}

}  // namespace

double eval_loss(const ScalarField& field, const ParamVector& theta, Batch batch) {
  check_input(field, theta);
  const double v = field.value(theta.span(), batch);
  if (!std::isfinite(v))
    throw NonFiniteError(field.name() + ": non-finite loss at " + describe_point(theta));
  return v;
}

ParamVector eval_grad(const ScalarField& field, const ParamVector& theta, Batch batch) {
  check_input(field, theta);
  ParamVector g(field.dim());
  field.gradient(theta.span(), g.span(), batch);
  if (!g.is_finite())
    throw NonFiniteError(field.name() + ": non-finite gradient at " + describe_point(theta));
  return g;
}

double DoubleWell::value(std::span<const double> x, Batch) const {
  const double x2 = x[0] * x[0];
  return x2 * x2 - x2;
}

void DoubleWell::gradient(std::span<const double> x, std::span<double> out, Batch) const {
  out[0] = 4.0 * x[0] * x[0] * x[0] - 2.0 * x[0];
}

double QuadraticBowl::value(std::span<const double> x, Batch) const {
  double s = 0.0;
  for (double c : x) s += c * c;
  return 0.5 * s;
}

void QuadraticBowl::gradient(std::span<const double> x, std::span<double> out, Batch) const {
  std::copy(x.begin(), x.end(), out.begin());
}

// ---------------------------------------------------------------------------
// Gaussian mixture

GaussianMixture2d::GaussianMixture2d(std::vector<GaussianBump> bumps, double confinement)
    : bumps_(std::move(bumps)), confinement_(confinement) {
  // Plain gradient descent from each centre; accurate enough to tell basins
  // apart and to check the value gaps.
  for (const auto& b : bumps_) {
    double p[2] = {b.cx, b.cy};
    double g[2];
    for (int it = 0; it < 200000; ++it) {
      gradient(p, g);
      if (std::hypot(g[0], g[1]) < 1e-12) break;
      p[0] -= 0.02 * g[0];
      p[1] -= 0.02 * g[1];
    }
    minima_.push_back(ParamVector{p[0], p[1]});
  }
  std::sort(minima_.begin(), minima_.end(), [this](const ParamVector& a, const ParamVector& b) {
    return value(a.span()) < value(b.span());
  });
}

GaussianMixture2d::GaussianMixture2d(std::uint64_t seed) : confinement_(kConfinement) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int k = 3 + static_cast<int>(rng() % 4);
    std::vector<GaussianBump> bumps;
    int draws = 0;
    while (static_cast<int>(bumps.size()) < k && draws < 2000) {
      ++draws;
      GaussianBump b;
      b.cx = -2.0 + 4.0 * unit(rng);
      b.cy = -2.0 + 4.0 * unit(rng);
      const bool far = std::all_of(bumps.begin(), bumps.end(), [&](const GaussianBump& o) {
        return std::hypot(o.cx - b.cx, o.cy - b.cy) >= 1.5;
      });
      if (far) bumps.push_back(b);
    }
    if (static_cast<int>(bumps.size()) < k) continue;
    std::vector<int> rank(k);
    for (int i = 0; i < k; ++i) rank[i] = i;
    std::shuffle(rank.begin(), rank.end(), rng);
    for (int i = 0; i < k; ++i) {
      bumps[i].depth = 0.6 + 0.2 * rank[i] + 0.05 * unit(rng);
      bumps[i].width = 0.45 + 0.15 * unit(rng);
    }

    GaussianMixture2d candidate(bumps, kConfinement);
    const auto& mins = candidate.reference_minima();
    bool ok = true;
    for (std::size_t i = 0; i < mins.size() && ok; ++i)
      for (std::size_t j = i + 1; j < mins.size() && ok; ++j)
        ok = distance(mins[i], mins[j]) > 0.1;
    for (std::size_t i = 1; i < mins.size() && ok; ++i)
      ok = candidate.value(mins[i].span()) - candidate.value(mins[i - 1].span()) >= kMinGap;
    if (ok) {
      *this = std::move(candidate);
      return;
    }
  }
  throw Error("gaussian_mixture_2d: could not draw an admissible mixture for seed " +
              std::to_string(seed));
}

double GaussianMixture2d::value(std::span<const double> x, Batch) const {
  const double r2 = x[0] * x[0] + x[1] * x[1];
  double v = 0.25 * confinement_ * r2 * r2;
  for (const auto& b : bumps_) {
    const double dx = x[0] - b.cx, dy = x[1] - b.cy;
    v -= b.depth * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
  }
  return v;
}

void GaussianMixture2d::gradient(std::span<const double> x, std::span<double> out, Batch) const {
  const double r2 = x[0] * x[0] + x[1] * x[1];
  out[0] = confinement_ * r2 * x[0];
  out[1] = confinement_ * r2 * x[1];
  for (const auto& b : bumps_) {
    const double dx = x[0] - b.cx, dy = x[1] - b.cy;
    const double s2 = b.width * b.width;
    const double e = b.depth * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
    out[0] += e * dx / s2;
    out[1] += e * dy / s2;
  }
}

// ---------------------------------------------------------------------------

Builtin parse_builtin(const std::string& name) {
  if (name == "double_well_1d") return Builtin::DoubleWell1d;
  if (name == "gaussian_mixture_2d") return Builtin::GaussianMixture2d;
  if (name == "quadratic_bowl") return Builtin::QuadraticBowl;
  throw ValidationError("unknown builtin landscape '" + name + "'");
}

std::string to_string(Builtin b) {
  switch (b) {
    case Builtin::DoubleWell1d: return "double_well_1d";
    case Builtin::GaussianMixture2d: return "gaussian_mixture_2d";
    case Builtin::QuadraticBowl: return "quadratic_bowl";
  }
  return "?";
}

FieldPtr make_builtin(Builtin which, std::uint64_t seed, std::size_t bowl_dim) {
  switch (which) {
    case Builtin::DoubleWell1d: return std::make_shared<DoubleWell>();
    case Builtin::GaussianMixture2d: return std::make_shared<GaussianMixture2d>(seed);
    case Builtin::QuadraticBowl: return std::make_shared<QuadraticBowl>(bowl_dim);
  }
  throw ValidationError("unknown builtin landscape");
}

FieldPtr make_builtin(const std::string& name, std::uint64_t seed, std::size_t bowl_dim) {
  return make_builtin(parse_builtin(name), seed, bowl_dim);
}

}  // namespace lossbar
