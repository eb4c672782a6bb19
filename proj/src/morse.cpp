#include "lossbar/morse.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "lossbar/error.hpp"

namespace lossbar {

std::size_t tri_index(std::size_t depth, std::size_t b, std::size_t c) {
  // rows of constant b hold depth - b + 1 points
  return b * (depth + 1) - b * (b - 1) / 2 + c;
}

std::size_t tri_point_count(std::size_t depth) { return (depth + 1) * (depth + 2) / 2; }

namespace {

constexpr double kPlaneTolerance = 1e-12;

PathState triangle_side(const SampledSimplex& s, int side) {
  const std::size_t d = s.grid_depth;
  PathState p;
  for (std::size_t t = 0; t <= d; ++t) {
    std::size_t b = 0, c = 0;
    if (side == 0) b = t;              // v0 -> v1
    if (side == 1) c = t;              // v0 -> v2
    if (side == 2) b = d - t, c = t;   // v1 -> v2
    p.points.push_back(s.sample_points[tri_index(d, b, c)]);
  }
  return p;
}

// Interior grid segments: every neighbouring pair of grid points that does
// not lie along one side of the triangle.
template <class Visit>
void for_each_grid_segment(std::size_t d, Visit&& visit) {
  auto same_side = [d](std::size_t b1, std::size_t c1, std::size_t b2, std::size_t c2) {
    return (b1 == 0 && b2 == 0) || (c1 == 0 && c2 == 0) || (b1 + c1 == d && b2 + c2 == d);
  };
  for (std::size_t b = 0; b <= d; ++b)
    for (std::size_t c = 0; b + c <= d; ++c) {
      if (b + c + 1 <= d) {
        if (!same_side(b, c, b + 1, c)) visit(tri_index(d, b, c), tri_index(d, b + 1, c));
        if (!same_side(b, c, b, c + 1)) visit(tri_index(d, b, c), tri_index(d, b, c + 1));
      }
      if (b >= 1 && !same_side(b, c, b - 1, c + 1))
        visit(tri_index(d, b, c), tri_index(d, b - 1, c + 1));
    }
}

double triangle_interior_max(const ScalarField& field, const SampledSimplex& s,
                             std::span<const double> alpha_grid) {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& p : s.sample_points) v = std::max(v, field.value(p.span()));
  for_each_grid_segment(s.grid_depth, [&](std::size_t i, std::size_t j) {
    for (double a : alpha_grid)
      v = std::max(v, field.value(lerp(s.sample_points[i], s.sample_points[j], a).span()));
  });
  return v;
}

// Gradient component normal to the least-squares plane through the six grid
// neighbours of an interior point.
ParamVector normal_component(const ParamVector& g, const ParamVector& center,
                             const std::vector<const ParamVector*>& star, std::size_t a,
                             std::size_t b, std::size_t c) {
  const std::size_t k = star.size();
  std::vector<ParamVector> disp;
  disp.reserve(k);
  for (const auto* p : star) disp.push_back(*p - center);
  Eigen::MatrixXd gram(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = dot(disp[i], disp[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const auto& lambda = eig.eigenvalues();  // ascending
  const double l1 = lambda(k - 1), l2 = lambda(k - 2);
  if (!(l1 > 0.0) || !(l2 > kPlaneTolerance * l1))
    throw DegenerateError("degenerate tangent plane at grid point (" + std::to_string(a) + ", " +
                          std::to_string(b) + ", " + std::to_string(c) + ")");
  ParamVector out = g;
  for (std::size_t e = k - 2; e < k; ++e) {
    ParamVector basis(g.dim());
    for (std::size_t i = 0; i < k; ++i) {
      const double w = eig.eigenvectors()(i, e);
      for (std::size_t x = 0; x < g.dim(); ++x) basis[x] += w * disp[i][x];
    }
    basis *= 1.0 / std::sqrt(lambda(e));
    const double s = dot(basis, g);
    for (std::size_t x = 0; x < g.dim(); ++x) out[x] -= s * basis[x];
  }
  return out;
}

SampledSimplex optimize_triangle(const ScalarField& field,
                                 const std::vector<std::pair<std::size_t, Minimum>>& vertices,
                                 std::size_t d, const PathConfig& config,
                                 const std::vector<const SampledSimplex*>& faces) {
  SampledSimplex s;
  s.r = 2;
  s.grid_depth = d;
  for (const auto& v : vertices) s.vertex_ids.push_back(v.first);
  s.sample_points.resize(tri_point_count(d));

  const ParamVector& v0 = vertices[0].second.params;
  const ParamVector& v1 = vertices[1].second.params;
  const ParamVector& v2 = vertices[2].second.params;
  for (std::size_t b = 0; b <= d; ++b)
    for (std::size_t c = 0; b + c <= d; ++c) {
      const std::size_t a = d - b - c;
      ParamVector p(v0.dim());
      for (std::size_t x = 0; x < p.dim(); ++x)
        p[x] = (static_cast<double>(a) * v0[x] + static_cast<double>(b) * v1[x] +
                static_cast<double>(c) * v2[x]) /
               static_cast<double>(d);
      s.sample_points[tri_index(d, b, c)] = std::move(p);
    }
  // Frozen sides, copied point for point from the optimised edges.
  for (int side = 0; side < 3; ++side) {
    const auto& pts = faces[side]->sample_points;
    if (pts.size() != d + 1)
      throw ValidationError("edge grid does not match the triangle grid depth");
    for (std::size_t t = 0; t <= d; ++t) {
      std::size_t b = 0, c = 0;
      if (side == 0) b = t;
      if (side == 1) c = t;
      if (side == 2) b = d - t, c = t;
      s.sample_points[tri_index(d, b, c)] = pts[t];
    }
  }

  double face_max = -std::numeric_limits<double>::infinity();
  for (const auto* f : faces) face_max = std::max(face_max, f->filtration_value);
  auto filtration = [&](SampledSimplex& cur, std::size_t epoch) {
    const double v = std::max(face_max, triangle_interior_max(field, cur, config.alpha_grid));
    double inner = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b < d; ++b)
      for (std::size_t c = 1; b + c < d; ++c)
        inner = std::max(inner, field.value(cur.sample_points[tri_index(d, b, c)].span()));
    if (!std::isfinite(v)) throw DivergenceError(field.name() + ": non-finite simplex loss", epoch);
    cur.filtration_value = v;
    cur.trace.push_back(v);
    cur.interior_trace.push_back(inner);
  };

  filtration(s, 0);
  SampledSimplex best = s;
  const bool movable = field.dim() > 1;  // in 1D the normal space is trivial
  SchedulerSpec lr = config.lr;
  lr.batches_per_epoch = 1;

  struct Interior {
    std::size_t index, a, b, c;
    std::vector<std::size_t> star;
  };
  std::vector<Interior> interior;
  for (std::size_t b = 1; b < d; ++b)
    for (std::size_t c = 1; b + c < d; ++c)
      interior.push_back({tri_index(d, b, c), d - b - c, b, c,
                          {tri_index(d, b + 1, c), tri_index(d, b - 1, c), tri_index(d, b, c + 1),
                           tri_index(d, b, c - 1), tri_index(d, b + 1, c - 1),
                           tri_index(d, b - 1, c + 1)}});

  for (std::size_t epoch = 1; epoch <= config.epochs && movable && !interior.empty(); ++epoch) {
    const double eta = schedule_lr(lr, epoch - 1);
    std::vector<ParamVector> moved(interior.size());
    for (std::size_t k = 0; k < interior.size(); ++k) {
      const auto& it = interior[k];
      const ParamVector& center = s.sample_points[it.index];
      ParamVector g(center.dim());
      field.gradient(center.span(), g.span());
      if (!g.is_finite() || !center.is_finite())
        throw DivergenceError(field.name() + ": non-finite gradient at grid point (" +
                                  std::to_string(it.a) + ", " + std::to_string(it.b) + ", " +
                                  std::to_string(it.c) + ")",
                              epoch);
      if (config.l2 > 0.0)
        for (std::size_t x = 0; x < g.dim(); ++x) g[x] += config.l2 * center[x];
      std::vector<const ParamVector*> star;
      for (std::size_t n : it.star) star.push_back(&s.sample_points[n]);
      const ParamVector orth = normal_component(g, center, star, it.a, it.b, it.c);
      ParamVector next = center;
      for (std::size_t x = 0; x < next.dim(); ++x) next[x] -= eta * orth[x];
      moved[k] = std::move(next);
    }
    for (std::size_t k = 0; k < interior.size(); ++k)
      s.sample_points[interior[k].index] = std::move(moved[k]);
    filtration(s, epoch);
    if (s.filtration_value < best.filtration_value) {
      best.sample_points = s.sample_points;
      best.filtration_value = s.filtration_value;
    }
  }
  best.trace = std::move(s.trace);
  best.interior_trace = std::move(s.interior_trace);
  return best;
}

}  // namespace

double simplex_max_loss(const ScalarField& field, const SampledSimplex& s,
                        std::span<const double> alpha_grid,
                        const std::vector<const SampledSimplex*>& faces) {
  if (s.r == 0) return field.value(s.sample_points.front().span());
  if (s.r == 1) return path_max_loss(field, PathState{s.sample_points}, alpha_grid).value;
  double v = triangle_interior_max(field, s, alpha_grid);
  if (faces.size() == 3) {
    for (const auto* f : faces) v = std::max(v, f->filtration_value);
  } else {
    for (int side = 0; side < 3; ++side)
      v = std::max(v, path_max_loss(field, triangle_side(s, side), alpha_grid).value);
  }
  return v;
}

SampledSimplex optimize_simplex(const ScalarField& field,
                                const std::vector<std::pair<std::size_t, Minimum>>& vertices,
                                std::size_t grid_depth, const PathConfig& config,
                                const std::vector<const SampledSimplex*>& faces, Exec exec) {
  if (vertices.size() != 2 && vertices.size() != 3)
    throw ValidationError("optimize_simplex supports 1- and 2-simplices");
  auto sorted = vertices;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].first == sorted[i - 1].first) throw ValidationError("simplex vertices must be distinct");
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size(); ++j)
      if (!(distance(sorted[i].second.params, sorted[j].second.params) > 0.0))
        throw ValidationError("simplex vertices must be distinct points");

  PathConfig edge_config = config;
  edge_config.n_points = grid_depth - 1;

  if (sorted.size() == 2) {
    if (grid_depth < 4) throw ValidationError("grid depth must be at least 4 for an edge");
    const auto r = optimize_path(field, sorted[0].second, sorted[1].second, edge_config, exec);
    SampledSimplex s;
    s.r = 1;
    s.vertex_ids = {sorted[0].first, sorted[1].first};
    s.grid_depth = grid_depth;
    s.sample_points = r.best_path.points;
    s.filtration_value = r.best_max;
    s.trace = r.trace.max_loss;
    return s;
  }

  if (grid_depth < 4) throw ValidationError("grid depth must be at least 4 for a triangle");
  std::vector<SampledSimplex> own;
  std::vector<const SampledSimplex*> sides = faces;
  if (sides.size() != 3) {
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    own.reserve(3);
    for (const auto& pr : pairs)
      own.push_back(optimize_simplex(field, {sorted[pr[0]], sorted[pr[1]]}, grid_depth, config, {},
                                     exec));
    sides = {&own[0], &own[1], &own[2]};
  }
  return optimize_triangle(field, sorted, grid_depth, config, sides);
}

// ---------------------------------------------------------------------------

void FiltrationComplex::add(std::vector<std::size_t> vertices, double value) {
  std::sort(vertices.begin(), vertices.end());
  if (vertices.empty()) throw ValidationError("empty simplex");
  if (std::adjacent_find(vertices.begin(), vertices.end()) != vertices.end())
    throw ValidationError("simplex with a repeated vertex");
  if (index_.count(vertices)) throw ValidationError("simplex added twice");
  const std::size_t dim = vertices.size() - 1;
  if (dim > 0) {
    for (std::size_t skip = 0; skip < vertices.size(); ++skip) {
      std::vector<std::size_t> face;
      for (std::size_t k = 0; k < vertices.size(); ++k)
        if (k != skip) face.push_back(vertices[k]);
      if (!index_.count(face)) throw ValidationError("simplex added before its faces");
    }
  }
  if (by_dim_.size() <= dim) by_dim_.resize(dim + 1);
  index_[vertices] = by_dim_[dim].size();
  by_dim_[dim].push_back({std::move(vertices), value});
}

const std::vector<Simplex>& FiltrationComplex::simplices(int dim) const {
  static const std::vector<Simplex> empty;
  if (dim < 0 || dim > max_dim()) return empty;
  return by_dim_[static_cast<std::size_t>(dim)];
}

std::size_t FiltrationComplex::index_of(const std::vector<std::size_t>& vertices) const {
  const auto it = index_.find(vertices);
  if (it == index_.end()) throw ValidationError("simplex not in complex");
  return it->second;
}

BoundaryMatrix FiltrationComplex::boundary(int r) const {
  if (r < 1) throw ValidationError("boundary operator needs r >= 1");
  BoundaryMatrix m;
  for (const auto& s : simplices(r)) {
    std::vector<std::size_t> col;
    for (std::size_t skip = 0; skip < s.vertices.size(); ++skip) {
      std::vector<std::size_t> face;
      for (std::size_t k = 0; k < s.vertices.size(); ++k)
        if (k != skip) face.push_back(s.vertices[k]);
      col.push_back(index_of(face));
    }
    std::sort(col.begin(), col.end());
    m.push_back(std::move(col));
  }
  return m;
}

std::size_t FiltrationComplex::clamp_monotone() {
  std::size_t changed = 0;
  for (int r = 1; r <= max_dim(); ++r) {
    const auto bd = boundary(r);
    for (std::size_t j = 0; j < bd.size(); ++j) {
      double face_max = -std::numeric_limits<double>::infinity();
      for (std::size_t f : bd[j]) face_max = std::max(face_max, by_dim_[r - 1][f].value);
      if (by_dim_[r][j].value < face_max) {
        by_dim_[r][j].value = face_max;
        ++changed;
      }
    }
  }
  clamp_count += changed;
  return changed;
}

bool FiltrationComplex::monotone() const {
  for (int r = 1; r <= max_dim(); ++r) {
    const auto bd = boundary(r);
    for (std::size_t j = 0; j < bd.size(); ++j)
      for (std::size_t f : bd[j])
        if (by_dim_[r - 1][f].value > by_dim_[r][j].value) return false;
  }
  return true;
}

BoundaryMatrix compose(const BoundaryMatrix& lower, const BoundaryMatrix& upper) {
  BoundaryMatrix out;
  out.reserve(upper.size());
  for (const auto& col : upper) {
    std::vector<std::size_t> acc;
    for (std::size_t mid : col) {
      std::vector<std::size_t> next;
      std::set_symmetric_difference(acc.begin(), acc.end(), lower.at(mid).begin(),
                                    lower.at(mid).end(), std::back_inserter(next));
      acc.swap(next);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

FiltrationComplex build_complex(const std::vector<Minimum>& minima, const ScalarField& field,
                                int r_max, const MorseConfig& config, Exec exec) {
  if (r_max != 1 && r_max != 2) throw ValidationError("r_max must be 1 or 2");
  if (minima.size() < static_cast<std::size_t>(r_max) + 1)
    throw ValidationError("need at least r_max + 1 minima");
  const std::size_t depth = config.grid_depth ? config.grid_depth : (r_max == 1 ? 8 : 6);
  const std::size_t n = minima.size();

  FiltrationComplex cx;
  for (std::size_t i = 0; i < n; ++i) {
    cx.add({i}, minima[i].loss);
    SampledSimplex v;
    v.vertex_ids = {i};
    v.sample_points = {minima[i].params};
    v.filtration_value = minima[i].loss;
    cx.sampled.push_back(std::move(v));
  }

  std::vector<std::pair<std::size_t, std::size_t>> edge_ids;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edge_ids.emplace_back(i, j);
  std::vector<SampledSimplex> edges(edge_ids.size());
  for_each_index(exec, edge_ids.size(), [&](std::size_t k) {
    const auto [i, j] = edge_ids[k];
    edges[k] = optimize_simplex(field, {{i, minima[i]}, {j, minima[j]}}, depth, config.path);
  });
  std::map<std::pair<std::size_t, std::size_t>, const SampledSimplex*> edge_of;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    cx.add(edges[k].vertex_ids, edges[k].filtration_value);
    edge_of[edge_ids[k]] = &edges[k];
  }

  std::vector<SampledSimplex> triangles;
  if (r_max == 2) {
    std::vector<std::array<std::size_t, 3>> tri_ids;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) tri_ids.push_back({i, j, k});
    triangles.resize(tri_ids.size());
    for_each_index(exec, tri_ids.size(), [&](std::size_t t) {
      const auto [i, j, k] = tri_ids[t];
      triangles[t] = optimize_simplex(field, {{i, minima[i]}, {j, minima[j]}, {k, minima[k]}},
                                      depth, config.path,
                                      {edge_of.at({i, j}), edge_of.at({i, k}), edge_of.at({j, k})});
    });
    for (const auto& t : triangles) cx.add(t.vertex_ids, t.filtration_value);
  }
  cx.clamp_monotone();
  for (auto& e : edges) cx.sampled.push_back(std::move(e));
  for (auto& t : triangles) cx.sampled.push_back(std::move(t));
  return cx;
}

FiltrationComplex complex_from_values(const std::vector<std::pair<std::size_t, double>>& vertices,
                                      const std::vector<Simplex>& edges) {
  FiltrationComplex cx;
  for (const auto& [id, v] : vertices) cx.add({id}, v);
  for (const auto& e : edges) cx.add(e.vertices, e.value);
  return cx;
}

std::vector<PersistenceDiagram> reduce(const FiltrationComplex& cx, double tie_epsilon) {
  struct Entry {
    int dim;
    std::size_t index;
    double key;
    const Simplex* simplex;
  };
  std::vector<Entry> entries;
  {
    const auto& verts = cx.simplices(0);
    std::vector<double> values;
    std::vector<std::size_t> labels;
    for (const auto& v : verts) {
      values.push_back(v.value);
      labels.push_back(v.vertices.front());
    }
    const auto keys = level_keys(values, labels, tie_epsilon);
    for (std::size_t i = 0; i < verts.size(); ++i) entries.push_back({0, i, keys[i], &verts[i]});
  }
  for (int r = 1; r <= cx.max_dim(); ++r) {
    const auto& s = cx.simplices(r);
    for (std::size_t i = 0; i < s.size(); ++i) entries.push_back({r, i, s[i].value, &s[i]});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.simplex->vertices < b.simplex->vertices;
  });

  const std::size_t total = entries.size();
  std::vector<std::vector<std::size_t>> position(static_cast<std::size_t>(cx.max_dim()) + 1);
  for (int r = 0; r <= cx.max_dim(); ++r) position[r].resize(cx.simplices(r).size());
  for (std::size_t k = 0; k < total; ++k) position[entries[k].dim][entries[k].index] = k;

  std::vector<BoundaryMatrix> bd(static_cast<std::size_t>(cx.max_dim()) + 1);
  for (int r = 1; r <= cx.max_dim(); ++r) bd[r] = cx.boundary(r);

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> pivot_owner(total, kNone);
  std::vector<std::vector<std::size_t>> reduced(total);
  std::vector<char> paired(total, 0);
  std::vector<std::vector<DiagramPoint>> finite(position.size());
  std::vector<std::vector<double>> essential(position.size());

  std::vector<std::size_t> col, merged;
  for (std::size_t j = 0; j < total; ++j) {
    const Entry& e = entries[j];
    col.clear();
    if (e.dim > 0) {
      for (std::size_t f : bd[e.dim][e.index]) {
        const std::size_t fp = position[e.dim - 1][f];
        if (fp >= j || cx.simplices(e.dim - 1)[f].value > e.simplex->value)
          throw ValidationError("non-monotone filtration: a face enters after its coface");
        col.push_back(fp);
      }
      std::sort(col.begin(), col.end(), std::greater<>());
    }
    while (!col.empty() && pivot_owner[col.front()] != kNone) {
      const auto& other = reduced[pivot_owner[col.front()]];
      merged.clear();
      std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                    std::back_inserter(merged), std::greater<>());
      col.swap(merged);
    }
    if (col.empty()) continue;
    const std::size_t low = col.front();
    pivot_owner[low] = j;
    paired[low] = paired[j] = 1;
    const Entry& birth = entries[low];
    finite[birth.dim].push_back({birth.simplex->value, e.simplex->value});
    reduced[j] = col;
  }
  for (std::size_t k = 0; k < total; ++k)
    if (!paired[k]) essential[entries[k].dim].push_back(entries[k].simplex->value);

  std::vector<PersistenceDiagram> out;
  for (std::size_t r = 0; r < position.size(); ++r)
    out.push_back(PersistenceDiagram::make(std::move(finite[r]), std::move(essential[r])));
  return out;
}

double index_r_to_score(const std::vector<PersistenceDiagram>& diagrams, int r) {
  if (r < 0 || static_cast<std::size_t>(r) >= diagrams.size())
    throw ValidationError("no diagram of dimension " + std::to_string(r));
  const auto& d = diagrams[static_cast<std::size_t>(r)];
  if (r == 0) {
    if (d.essential.empty()) throw ValidationError("dimension-0 diagram without essential class");
    const double global = *std::min_element(d.essential.begin(), d.essential.end());
    return bottleneck_distance(d, PersistenceDiagram::make({}, {global}));
  }
  double best = 0.0;
  for (const auto& p : d.finite) best = std::max(best, diagonal_cost(p));
  return best;
}

}  // namespace lossbar
