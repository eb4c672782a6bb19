#include "lossbar/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "lossbar/error.hpp"

namespace lossbar::oracle {

double ScalarGrid::coordinate(std::size_t axis, std::size_t i) const {
  const auto& b = box[axis];
  return b.lo + (b.hi - b.lo) * static_cast<double>(i) / static_cast<double>(resolution[axis] - 1);
}

double ScalarGrid::spacing(std::size_t axis) const {
  return (box[axis].hi - box[axis].lo) / static_cast<double>(resolution[axis] - 1);
}

void ScalarGrid::validate() const {
  if (resolution.empty() || resolution.size() > 2) throw ValidationError("grid must be 1D or 2D");
  if (box.size() != resolution.size()) throw ValidationError("grid box/resolution mismatch");
  std::size_t total = 1;
  for (std::size_t r : resolution) {
    if (r < 2) throw ValidationError("grid resolution must be at least 2 per axis");
    total *= r;
  }
  for (const auto& b : box)
    if (!(b.hi > b.lo)) throw ValidationError("grid box must have hi > lo");
  if (values.size() != total) throw ValidationError("grid value count mismatch");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("grid contains a non-finite value");
}

ScalarGrid grid_sample(const ScalarField& field, const std::vector<Interval>& box,
                       const std::vector<std::size_t>& resolution, Exec exec) {
  if (resolution.size() != field.dim()) throw DimensionError(field.dim(), resolution.size());
  ScalarGrid grid;
  grid.box = box;
  grid.resolution = resolution;
  if (box.size() != resolution.size() || resolution.empty() || resolution.size() > 2)
    throw ValidationError("grid_sample supports 1 or 2 axes with one interval per axis");
  for (std::size_t r : resolution)
    if (r < 2) throw ValidationError("grid resolution must be at least 2 per axis");

  const std::size_t rows = resolution[0];
  const std::size_t cols = resolution.size() == 2 ? resolution[1] : 1;
  grid.values.resize(rows * cols);
  for_each_index(exec, rows, [&](std::size_t i) {
    ParamVector x(resolution.size());
    x[0] = grid.coordinate(0, i);
    for (std::size_t j = 0; j < cols; ++j) {
      if (resolution.size() == 2) x[1] = grid.coordinate(1, j);
      const double v = field.value(x.span());
      if (!std::isfinite(v))
        throw NonFiniteError(field.name() + ": non-finite value at lattice point (" +
                             std::to_string(i) +
                             (resolution.size() == 2 ? ", " + std::to_string(j) : "") + ")");
      grid.values[i * cols + j] = v;
    }
  });
  return grid;
}

namespace {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  std::vector<std::size_t> parent;
};

// Vertex order: value, then lattice index.
std::vector<std::size_t> vertex_order(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b] || (v[a] == v[b] && a < b); });
  return order;
}

PersistenceDiagram dim0(const ScalarGrid& grid) {
  const auto& v = grid.values;
  const std::size_t rows = grid.resolution[0];
  const std::size_t cols = grid.axes() == 2 ? grid.resolution[1] : 1;
  const auto order = vertex_order(v);
  std::vector<std::size_t> rank(v.size());
  for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;

  // Component roots are kept at their oldest vertex (lowest rank).
  UnionFind uf(v.size());
  std::vector<char> active(v.size(), 0);
  std::vector<DiagramPoint> pts;
  for (std::size_t x : order) {
    active[x] = 1;
    const std::size_t i = x / cols, j = x % cols;
    std::size_t nbrs[4];
    std::size_t count = 0;
    if (i > 0) nbrs[count++] = x - cols;
    if (i + 1 < rows) nbrs[count++] = x + cols;
    if (cols > 1 && j > 0) nbrs[count++] = x - 1;
    if (cols > 1 && j + 1 < cols) nbrs[count++] = x + 1;
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t y = nbrs[k];
      if (!active[y]) continue;
      std::size_t a = uf.find(x), b = uf.find(y);
      if (a == b) continue;
      if (rank[a] < rank[b]) std::swap(a, b);  // a is the younger root
      pts.push_back({v[a], v[x]});
      uf.parent[a] = b;
    }
  }
  return PersistenceDiagram::make(std::move(pts), {v[order.front()]});
}

// Cubical complex of a 2D grid under the lower-star filtration.
PersistenceDiagram dim1(const ScalarGrid& grid) {
  const auto& v = grid.values;
  const std::size_t rows = grid.resolution[0], cols = grid.resolution[1];
  const std::size_t nv = rows * cols;

  // Edges: horizontal (i, j)-(i, j+1) then vertical (i, j)-(i+1, j).
  struct Edge {
    std::size_t a, b;
    double value;
  };
  std::vector<Edge> edges;
  edges.reserve(rows * (cols - 1) + (rows - 1) * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      const std::size_t x = i * cols + j;
      edges.push_back({x, x + 1, std::max(v[x], v[x + 1])});
    }
  const std::size_t vertical0 = edges.size();
  for (std::size_t i = 0; i + 1 < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t x = i * cols + j;
      edges.push_back({x, x + cols, std::max(v[x], v[x + cols])});
    }
  auto horizontal = [&](std::size_t i, std::size_t j) { return i * (cols - 1) + j; };
  auto vertical = [&](std::size_t i, std::size_t j) { return vertical0 + i * cols + j; };

  std::vector<std::size_t> edge_order(edges.size());
  std::iota(edge_order.begin(), edge_order.end(), std::size_t{0});
  std::sort(edge_order.begin(), edge_order.end(), [&](std::size_t a, std::size_t b) {
    return edges[a].value < edges[b].value || (edges[a].value == edges[b].value && a < b);
  });
  std::vector<std::size_t> edge_rank(edges.size());
  for (std::size_t k = 0; k < edge_order.size(); ++k) edge_rank[edge_order[k]] = k;

  // Edges that close a cycle (positive edges) under the vertex filtration.
  // Within equal values vertices precede edges, so every edge's endpoints
  // are present when it enters.
  UnionFind uf(nv);
  std::vector<char> positive(edges.size(), 0);
  for (std::size_t e : edge_order) {
    const std::size_t a = uf.find(edges[e].a), b = uf.find(edges[e].b);
    if (a == b)
      positive[e] = 1;
    else
      uf.parent[std::max(a, b)] = std::min(a, b);
  }

  struct Square {
    std::size_t i, j;
    double value;
  };
  std::vector<Square> squares;
  squares.reserve((rows - 1) * (cols - 1));
  for (std::size_t i = 0; i + 1 < rows; ++i)
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      const std::size_t x = i * cols + j;
      squares.push_back({i, j, std::max({v[x], v[x + 1], v[x + cols], v[x + cols + 1]})});
    }
  std::vector<std::size_t> sq_order(squares.size());
  std::iota(sq_order.begin(), sq_order.end(), std::size_t{0});
  std::sort(sq_order.begin(), sq_order.end(), [&](std::size_t a, std::size_t b) {
    return squares[a].value < squares[b].value || (squares[a].value == squares[b].value && a < b);
  });

  // Column reduction over Z/2; columns hold edge ranks in decreasing order.
  std::unordered_map<std::size_t, std::vector<std::size_t>> reduced;  // pivot -> column
  std::vector<DiagramPoint> pts;
  std::vector<std::size_t> col, merged;
  for (std::size_t s : sq_order) {
    const auto& q = squares[s];
    col = {edge_rank[horizontal(q.i, q.j)], edge_rank[horizontal(q.i + 1, q.j)],
           edge_rank[vertical(q.i, q.j)], edge_rank[vertical(q.i, q.j + 1)]};
    std::sort(col.begin(), col.end(), std::greater<>());
    while (!col.empty()) {
      const auto it = reduced.find(col.front());
      if (it == reduced.end()) break;
      merged.clear();
      std::set_symmetric_difference(col.begin(), col.end(), it->second.begin(), it->second.end(),
                                    std::back_inserter(merged), std::greater<>());
      col.swap(merged);
    }
    if (col.empty()) continue;
    const std::size_t pivot = col.front();
    pts.push_back({edges[edge_order[pivot]].value, q.value});
    reduced.emplace(pivot, col);
  }

  std::vector<double> essential;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (positive[e] && !reduced.count(edge_rank[e])) essential.push_back(edges[e].value);
  return PersistenceDiagram::make(std::move(pts), std::move(essential));
}

}  // namespace

std::vector<PersistenceDiagram> sublevel_persistence(const ScalarGrid& grid, int max_dim) {
  grid.validate();
  std::vector<PersistenceDiagram> out;
  out.push_back(dim0(grid));
  if (grid.axes() == 2 && max_dim >= 1) out.push_back(dim1(grid));
  return out;
}

namespace {

void enumerate(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b,
               std::size_t i, std::vector<char>& used, double current, double& best) {
  if (current >= best) return;
  if (i == a.size()) {
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!used[j]) current = std::max(current, diagonal_cost(b[j]));
    best = std::min(best, current);
    return;
  }
  enumerate(a, b, i + 1, used, std::max(current, diagonal_cost(a[i])), best);
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (used[j]) continue;
    used[j] = 1;
    enumerate(a, b, i + 1, used, std::max(current, match_cost(a[i], b[j])), best);
    used[j] = 0;
  }
}

}  // namespace

double brute_bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  if (a.finite.size() > kBruteLimit || b.finite.size() > kBruteLimit)
    throw ValidationError("brute_bottleneck is limited to " + std::to_string(kBruteLimit) +
                          " finite points per diagram; use bottleneck_distance");
  if (a.essential.size() != b.essential.size()) return std::numeric_limits<double>::infinity();
  // Every pairing of the essential births, smallest maximum kept.
  std::vector<std::size_t> perm(b.essential.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double essential_cost = std::numeric_limits<double>::infinity();
  if (perm.empty()) essential_cost = 0.0;
  if (!perm.empty()) {
    do {
      double c = 0.0;
      for (std::size_t k = 0; k < perm.size(); ++k)
        c = std::max(c, std::abs(a.essential[k] - b.essential[perm[k]]));
      essential_cost = std::min(essential_cost, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> used(b.finite.size(), 0);
  enumerate(a.finite, b.finite, 0, used, 0.0, best);
  return std::max(essential_cost, best);
}

void save_grid(const ScalarGrid& grid, const std::filesystem::path& stem) {
  grid.validate();
  auto bin = stem;
  bin += ".bin";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + bin.string() + "'");
  for (double v : grid.values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
  nlohmann::ordered_json meta;
  meta["resolution"] = grid.resolution;
  meta["box"] = nlohmann::ordered_json::array();
  for (const auto& b : grid.box) meta["box"].push_back({b.lo, b.hi});
  auto sidecar = stem;
  sidecar += ".json";
  std::ofstream js(sidecar);
  js << meta.dump(2) << '\n';
}

ScalarGrid load_grid(const std::filesystem::path& stem) {
  auto sidecar = stem;
  sidecar += ".json";
  std::ifstream js(sidecar);
  if (!js) throw ValidationError("cannot read '" + sidecar.string() + "'");
  ScalarGrid grid;
  try {
    const auto meta = nlohmann::json::parse(js);
    grid.resolution = meta.at("resolution").get<std::vector<std::size_t>>();
    for (const auto& b : meta.at("box")) grid.box.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed grid sidecar: " + std::string(e.what()));
  }
  std::size_t total = 1;
  for (std::size_t r : grid.resolution) total *= r;
  auto bin = stem;
  bin += ".bin";
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + bin.string() + "'");
  grid.values.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ValidationError("grid file truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    grid.values[k] = std::bit_cast<double>(bits);
  }
  grid.validate();
  return grid;
}

}  // namespace lossbar::oracle
