#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lossbar/param_vector.hpp"

namespace lossbar {

// Explicit mini-batch: sample indices into the field's dataset. An empty
// batch means "the whole dataset" (or is ignored by analytic fields).
using Batch = std::span<const std::size_t>;

// A differentiable loss L over parameter space. Implementations are immutable
// after construction and safe for concurrent readers.
class ScalarField {
 public:
  virtual ~ScalarField() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  // Number of samples the loss averages over; 0 for analytic fields.
  virtual std::size_t sample_count() const { return 0; }

  // Unchecked kernels: x.size() == dim(), out.size() == dim().
  virtual double value(std::span<const double> x, Batch batch = {}) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out,
                        Batch batch = {}) const = 0;
  // Fused evaluation; fields where both share a forward pass override it.
  virtual double value_and_gradient(std::span<const double> x, std::span<double> out,
                                    Batch batch = {}) const {
    gradient(x, out, batch);
    return value(x, batch);
  }
};

using FieldPtr = std::shared_ptr<const ScalarField>;

// Checked entry points. Throw DimensionError on size mismatch and
// NonFiniteError when the input or the result is not finite.
double eval_loss(const ScalarField& field, const ParamVector& theta, Batch batch = {});
ParamVector eval_grad(const ScalarField& field, const ParamVector& theta, Batch batch = {});

// f(x) = x^4 - x^2. Minima at +-1/sqrt(2) with value -1/4, hump f(0) = 0.
class DoubleWell final : public ScalarField {
 public:
  std::size_t dim() const override { return 1; }
  std::string name() const override { return "double_well_1d"; }
  double value(std::span<const double> x, Batch = {}) const override;
  void gradient(std::span<const double> x, std::span<double> out, Batch = {}) const override;
};

// f(x) = |x|^2 / 2
class QuadraticBowl final : public ScalarField {
 public:
  explicit QuadraticBowl(std::size_t dim = 2) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "quadratic_bowl"; }
  double value(std::span<const double> x, Batch = {}) const override;
  void gradient(std::span<const double> x, std::span<double> out, Batch = {}) const override;

 private:
  std::size_t dim_;
};

struct GaussianBump {
  double cx = 0.0;
  double cy = 0.0;
  double depth = 1.0;
  double width = 0.5;  // standard deviation
};

// Seeded 2D landscape: a weak quartic confinement c/4 * |x|^4 minus 3..6
// Gaussian bumps. Construction rejects draws whose local minima are not one
// per bump or whose sorted minimum values are closer than min_gap.
class GaussianMixture2d final : public ScalarField {
 public:
  static constexpr double kConfinement = 0.02;
  static constexpr double kMinGap = 0.05;

  explicit GaussianMixture2d(std::uint64_t seed);
  GaussianMixture2d(std::vector<GaussianBump> bumps, double confinement);

  std::size_t dim() const override { return 2; }
  std::string name() const override { return "gaussian_mixture_2d"; }
  double value(std::span<const double> x, Batch = {}) const override;
  void gradient(std::span<const double> x, std::span<double> out, Batch = {}) const override;

  const std::vector<GaussianBump>& bumps() const { return bumps_; }
  // Local minima found by descending from every bump centre, sorted by value.
  const std::vector<ParamVector>& reference_minima() const { return minima_; }

 private:
  std::vector<GaussianBump> bumps_;
  double confinement_;
  std::vector<ParamVector> minima_;
};

enum class Builtin { DoubleWell1d, GaussianMixture2d, QuadraticBowl };

Builtin parse_builtin(const std::string& name);  // ValidationError on unknown names
std::string to_string(Builtin b);
FieldPtr make_builtin(Builtin which, std::uint64_t seed, std::size_t bowl_dim = 2);
FieldPtr make_builtin(const std::string& name, std::uint64_t seed, std::size_t bowl_dim = 2);

}  // namespace lossbar
