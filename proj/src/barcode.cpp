#include "lossbar/barcode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lossbar/error.hpp"

namespace lossbar {

void Barcode::validate() const {
  if (!std::isfinite(essential.birth)) throw ValidationError("essential birth must be finite");
  if (essential.death != kInf) throw ValidationError("essential segment must have death = inf");
  for (const auto& s : segments) {
    if (!std::isfinite(s.birth) || std::isnan(s.death))
      throw ValidationError("segment with invalid coordinates");
    if (s.death < s.birth)
      throw ValidationError("segment of minimum " + std::to_string(s.minimum_id) +
                            " has death < birth");
    if (s.death == kInf) throw ValidationError("only the essential segment may be infinite");
    if (s.birth < essential.birth)
      throw ValidationError("essential birth must be the lowest birth");
  }
}

PersistenceDiagram to_diagram(const Barcode& b) {
  std::vector<DiagramPoint> pts;
  pts.reserve(b.segments.size());
  for (const auto& s : b.segments) pts.push_back({s.birth, s.death});
  return PersistenceDiagram::make(std::move(pts), {b.essential.birth});
}

Barcode ideal_barcode(double global_min) {
  Barcode b;
  b.essential = {global_min, kInf, 0};
  return b;
}

double to_score(const Barcode& b) {
  return bottleneck_distance(to_diagram(b), to_diagram(ideal_barcode(b.essential.birth)));
}

std::vector<std::size_t> level_order(const std::vector<double>& losses,
                                     const std::vector<std::size_t>& ids, double eps) {
  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return losses[a] < losses[b] || (losses[a] == losses[b] && ids[a] < ids[b]);
  });
  // Runs of values within eps of the run's first value are reordered by id.
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && losses[order[end]] - losses[order[start]] <= eps) ++end;
    std::sort(order.begin() + start, order.begin() + end,
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    start = end;
  }
  return order;
}

std::vector<double> level_keys(const std::vector<double>& losses,
                               const std::vector<std::size_t>& ids, double eps) {
  const auto order = level_order(losses, ids, eps);
  std::vector<double> keys(losses.size());
  std::size_t start = 0;
  while (start < order.size()) {
    double lo = losses[order[start]];
    std::size_t end = start + 1;
    while (end < order.size() && losses[order[end]] - lo <= eps) ++end;
    for (std::size_t k = start; k < end; ++k) lo = std::min(lo, losses[order[k]]);
    for (std::size_t k = start; k < end; ++k) keys[order[k]] = lo;
    start = end;
  }
  return keys;
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

}  // namespace

std::vector<std::size_t> distinct_minima(const std::vector<Minimum>& minima, double radius,
                                         double tie_epsilon) {
  std::vector<double> losses;
  std::vector<std::size_t> ids(minima.size());
  for (const auto& m : minima) losses.push_back(m.loss);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::vector<std::size_t> kept;
  for (std::size_t id : level_order(losses, ids, tie_epsilon)) {
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return distance(minima[k].params, minima[id].params) < radius;
    });
    if (!dup) kept.push_back(id);
  }
  return kept;
}

BarcodeResult compute_barcode(const std::vector<Minimum>& minima, const ScalarField& field,
                              const BarcodeConfig& config, Exec exec) {
  if (minima.empty()) throw ValidationError("compute_barcode needs at least one minimum");
  for (const auto& m : minima)
    if (m.params.dim() != field.dim()) throw DimensionError(field.dim(), m.params.dim());

  BarcodeResult result;
  const std::vector<std::size_t> kept = distinct_minima(minima, config.dedup_radius, config.tie_epsilon);
  for (std::size_t id = 0; id < minima.size(); ++id)
    if (std::find(kept.begin(), kept.end(), id) == kept.end()) result.dropped_duplicates.push_back(id);

  const std::size_t n = kept.size();
  // rank r in [0, n) is the r-th lowest kept minimum.
  std::vector<std::pair<std::size_t, std::size_t>> jobs;  // (rank of p, rank of q), q lower
  for (std::size_t r = 1; r < n; ++r) {
    std::vector<std::size_t> lower(r);
    std::iota(lower.begin(), lower.end(), std::size_t{0});
    if (config.nearest_lower > 0 && config.nearest_lower < r) {
      const auto& p = minima[kept[r]].params;
      std::stable_sort(lower.begin(), lower.end(), [&](std::size_t a, std::size_t b) {
        return distance(p, minima[kept[a]].params) < distance(p, minima[kept[b]].params);
      });
      lower.resize(config.nearest_lower);
      std::sort(lower.begin(), lower.end());
    }
    for (std::size_t q : lower) jobs.emplace_back(r, q);
  }

  result.pairs.resize(jobs.size());
  for_each_index(exec, jobs.size(), [&](std::size_t j) {
    const auto [r, q] = jobs[j];
    PairRecord& rec = result.pairs[j];
    rec.from = kept[r];
    rec.to = kept[q];
    try {
      const auto path = optimize_path(field, minima[rec.from], minima[rec.to], config.path);
      rec.max_loss = path.best_max;
      rec.ok = true;
    } catch (const Error& e) {
      rec.error = e.what();
    }
  });
  for (const auto& rec : result.pairs)
    if (!rec.ok)
      result.warnings.push_back("path " + std::to_string(rec.from) + " -> " +
                                std::to_string(rec.to) + " skipped: " + rec.error);

  std::vector<double> height(n, kInf);
  if (config.chain_paths) {
    // Elder rule on the path graph: edges in increasing height, the component
    // whose oldest member has the higher rank dies at the merge.
    std::vector<std::size_t> edges;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (result.pairs[j].ok) edges.push_back(j);
    std::stable_sort(edges.begin(), edges.end(), [&](std::size_t a, std::size_t b) {
      return result.pairs[a].max_loss < result.pairs[b].max_loss;
    });
    UnionFind uf(n);  // roots are always the lowest rank of their component
    for (std::size_t j : edges) {
      std::size_t a = uf.find(jobs[j].first), b = uf.find(jobs[j].second);
      if (a == b) continue;
      if (a < b) std::swap(a, b);
      height[a] = result.pairs[j].max_loss;
      uf.parent[a] = b;
    }
  } else {
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (result.pairs[j].ok)
        height[jobs[j].first] = std::min(height[jobs[j].first], result.pairs[j].max_loss);
  }

  const Minimum& global = minima[kept[0]];
  result.barcode.essential = {global.loss, kInf, kept[0]};
  for (std::size_t r = 1; r < n; ++r) {
    if (height[r] == kInf)
      throw DivergenceError("no lower connection found for minimum " + std::to_string(kept[r]), 0);
    result.barcode.segments.push_back({minima[kept[r]].loss, height[r], kept[r]});
  }
  return result;
}

}  // namespace lossbar
