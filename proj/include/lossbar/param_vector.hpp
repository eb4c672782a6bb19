#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lossbar {

// A point in parameter space. Plain value type; finiteness is checked where
// points enter the public API (eval_loss / eval_grad), not on every update.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {}
  explicit ParamVector(std::vector<double> coords) : coords_(std::move(coords)) {}
  ParamVector(std::initializer_list<double> coords) : coords_(coords) {}

  std::size_t dim() const { return coords_.size(); }
  double& operator[](std::size_t i) { return coords_[i]; }
  double operator[](std::size_t i) const { return coords_[i]; }

  std::span<double> span() { return coords_; }
  std::span<const double> span() const { return coords_; }
  const std::vector<double>& coords() const { return coords_; }

  auto begin() { return coords_.begin(); }
  auto end() { return coords_.end(); }
  auto begin() const { return coords_.begin(); }
  auto end() const { return coords_.end(); }

  bool is_finite() const {
    for (double c : coords_)
      if (!std::isfinite(c)) return false;
    return true;
  }

  ParamVector& operator+=(const ParamVector& o) {
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += o.coords_[i];
    return *this;
  }
  ParamVector& operator-=(const ParamVector& o) {
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= o.coords_[i];
    return *this;
  }
  ParamVector& operator*=(double s) {
    for (double& c : coords_) c *= s;
    return *this;
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> coords_;
};

inline ParamVector operator+(ParamVector a, const ParamVector& b) { return a += b; }
inline ParamVector operator-(ParamVector a, const ParamVector& b) { return a -= b; }
inline ParamVector operator*(double s, ParamVector a) { return a *= s; }

inline double dot(const ParamVector& a, const ParamVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const ParamVector& a) { return std::sqrt(dot(a, a)); }

inline double distance(const ParamVector& a, const ParamVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// (1 - alpha) * a + alpha * b, written the same way everywhere so that the
// same pair of points always interpolates to bit-identical coordinates.
inline ParamVector lerp(const ParamVector& a, const ParamVector& b, double alpha) {
  ParamVector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = (1.0 - alpha) * a[i] + alpha * b[i];
  return out;
}

}  // namespace lossbar
