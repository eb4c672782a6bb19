#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace lossbar {

// Bars with death - birth <= kZeroLength are dropped when diagrams are built.
inline constexpr double kZeroLength = 1e-9;

struct DiagramPoint {
  double birth = 0.0;
  double death = 0.0;
  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

// Finite (birth, death) pairs plus the births of essential (infinite) classes.
struct PersistenceDiagram {
  std::vector<DiagramPoint> finite;
  std::vector<double> essential;

  // Drops zero-length bars and sorts both parts, so equal diagrams compare
  // equal with ==.
  static PersistenceDiagram make(std::vector<DiagramPoint> finite, std::vector<double> essential);
  void validate() const;  // ValidationError unless death > birth everywhere

  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

// Bottleneck (W-infinity) distance under the sup-norm. Finite points match
// each other at max(|db|, |dd|) or the diagonal at (death - birth) / 2;
// essential classes only match each other at |db|, and differing essential
// counts give +infinity. Exact: binary search over the candidate costs with a
// bipartite perfect-matching test.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b);

// Cost helpers shared with the brute-force matcher.
double match_cost(const DiagramPoint& a, const DiagramPoint& b);
double diagonal_cost(const DiagramPoint& a);

}  // namespace lossbar
