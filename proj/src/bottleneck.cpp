#include "lossbar/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lossbar/error.hpp"

namespace lossbar {

PersistenceDiagram PersistenceDiagram::make(std::vector<DiagramPoint> finite,
                                            std::vector<double> essential) {
  PersistenceDiagram d;
  for (const auto& p : finite)
    if (p.death - p.birth > kZeroLength) d.finite.push_back(p);
  d.essential = std::move(essential);
  std::sort(d.finite.begin(), d.finite.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
    return a.birth < b.birth || (a.birth == b.birth && a.death < b.death);
  });
  std::sort(d.essential.begin(), d.essential.end());
  return d;
}

void PersistenceDiagram::validate() const {
  for (const auto& p : finite) {
    if (!std::isfinite(p.birth) || !std::isfinite(p.death))
      throw ValidationError("diagram point with non-finite coordinate");
    if (!(p.death > p.birth)) throw ValidationError("diagram point with death <= birth");
  }
  for (double b : essential)
    if (!std::isfinite(b)) throw ValidationError("non-finite essential birth");
}

double match_cost(const DiagramPoint& a, const DiagramPoint& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

double diagonal_cost(const DiagramPoint& a) { return (a.death - a.birth) / 2.0; }

namespace {

// Kuhn's augmenting-path matching on a dense boolean adjacency.
class Matcher {
 public:
  explicit Matcher(std::size_t n) : n_(n), adj_(n * n, 0), match_right_(n), seen_(n) {}
  void allow(std::size_t l, std::size_t r) { adj_[l * n_ + r] = 1; }

  bool perfect() {
    std::fill(match_right_.begin(), match_right_.end(), kNone);
    for (std::size_t l = 0; l < n_; ++l) {
      std::fill(seen_.begin(), seen_.end(), 0);
      if (!augment(l)) return false;
    }
    return true;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  bool augment(std::size_t l) {
    for (std::size_t r = 0; r < n_; ++r) {
      if (!adj_[l * n_ + r] || seen_[r]) continue;
      seen_[r] = 1;
      if (match_right_[r] == kNone || augment(match_right_[r])) {
        match_right_[r] = l;
        return true;
      }
    }
    return false;
  }

  std::size_t n_;
  std::vector<char> adj_;
  std::vector<std::size_t> match_right_;
  std::vector<char> seen_;
};

// Left side: the n points of A, then m diagonal slots (one per point of B).
// Right side: the m points of B, then n diagonal slots (one per point of A).
bool feasible(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b, double eps) {
  const std::size_t n = a.size(), m = b.size();
  Matcher g(n + m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      if (match_cost(a[i], b[j]) <= eps) g.allow(i, j);
    if (diagonal_cost(a[i]) <= eps) g.allow(i, m + i);
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (diagonal_cost(b[j]) <= eps) g.allow(n + j, j);
    for (std::size_t i = 0; i < n; ++i) g.allow(n + j, m + i);
  }
  return g.perfect();
}

double finite_bottleneck(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::vector<double> candidates{0.0};
  for (const auto& p : a) candidates.push_back(diagonal_cost(p));
  for (const auto& q : b) candidates.push_back(diagonal_cost(q));
  for (const auto& p : a)
    for (const auto& q : b) candidates.push_back(match_cost(p, q));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Sending everything to the diagonal is always feasible at the largest
  // diagonal cost, so the answer is among the candidates.
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(a, b, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

}  // namespace

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  if (a.essential.size() != b.essential.size()) return std::numeric_limits<double>::infinity();
  // Sorted order is optimal for one-dimensional bottleneck matching.
  std::vector<double> ea = a.essential, eb = b.essential;
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  double essential_cost = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i)
    essential_cost = std::max(essential_cost, std::abs(ea[i] - eb[i]));
  return std::max(essential_cost, finite_bottleneck(a.finite, b.finite));
}

}  // namespace lossbar
