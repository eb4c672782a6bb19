#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lossbar/landscape.hpp"

namespace support {

// Central differences, step h, one coordinate at a time.
inline lossbar::ParamVector fd_gradient(const lossbar::ScalarField& f, const lossbar::ParamVector& x,
                                        double h = 1e-5) {
  lossbar::ParamVector g(x.dim());
  lossbar::ParamVector p = x;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    p[i] = x[i] + h;
    const double up = f.value(p.span());
    p[i] = x[i] - h;
    const double down = f.value(p.span());
    p[i] = x[i];
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// Largest per-coordinate |a - n| / max(|a|, |n|, floor).
inline double max_relative_error(const lossbar::ParamVector& a, const lossbar::ParamVector& n,
                                 double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(n[i]), floor});
    worst = std::max(worst, std::abs(a[i] - n[i]) / scale);
  }
  return worst;
}

inline lossbar::ParamVector uniform_point(std::mt19937_64& rng, std::size_t dim, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  lossbar::ParamVector x(dim);
  for (auto& c : x) c = u(rng);
  return x;
}

}  // namespace support

#include "lossbar/dataset.hpp"
#include "lossbar/mlp.hpp"

namespace support {

// Signs of every hidden pre-activation over the dataset, from a forward pass
// written independently of mlp.cpp (layer layout: W out x in row-major, then b).
inline std::vector<char> relu_pattern(const lossbar::MlpSpec& spec, const lossbar::Dataset& data,
                                      const lossbar::ParamVector& x) {
  std::vector<char> signs;
  for (std::size_t s = 0; s < data.n_samples; ++s) {
    std::vector<double> a(data.row(s).begin(), data.row(s).end());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
      const std::size_t in = spec.layer_widths[l], out = spec.layer_widths[l + 1];
      std::vector<double> z(out);
      for (std::size_t o = 0; o < out; ++o) {
        double acc = x[off + in * out + o];
        for (std::size_t k = 0; k < in; ++k) acc += x[off + o * in + k] * a[k];
        z[o] = acc;
      }
      off += in * out + out;
      if (l + 2 == spec.layer_widths.size()) break;
      for (auto& v : z) {
        signs.push_back(v > 0.0);
        v = std::max(v, 0.0);
      }
      a = std::move(z);
    }
  }
  return signs;
}

// Coordinates whose central-difference stencil [x - h e_i, x + h e_i] changes
// some ReLU sign: the loss is not smooth there and the stencil is no oracle.
inline std::vector<bool> kink_straddles(const lossbar::MlpSpec& spec, const lossbar::Dataset& data,
                                        const lossbar::ParamVector& x, double h) {
  std::vector<bool> out(x.dim(), false);
  const auto base = relu_pattern(spec, data, x);
  lossbar::ParamVector p = x;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    p[i] = x[i] + h;
    const bool up = relu_pattern(spec, data, p) != base;
    p[i] = x[i] - h;
    const bool down = relu_pattern(spec, data, p) != base;
    p[i] = x[i];
    out[i] = up || down;
  }
  return out;
}

// max_relative_error over the coordinates not flagged in `skip`.
inline double max_relative_error(const lossbar::ParamVector& a, const lossbar::ParamVector& n, double floor,
                                 const std::vector<bool>& skip) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (skip[i]) continue;
    const double scale = std::max({std::abs(a[i]), std::abs(n[i]), floor});
    worst = std::max(worst, std::abs(a[i] - n[i]) / scale);
  }
  return worst;
}

}  // namespace support
