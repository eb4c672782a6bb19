#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "lossbar/error.hpp"
#include "lossbar/landscape.hpp"
#include "lossbar/oracle.hpp"

using namespace lossbar;
using namespace lossbar::oracle;

namespace {

struct Field1d final : ScalarField {
  double (*f)(double);
  explicit Field1d(double (*f)(double)) : f(f) {}
  std::size_t dim() const override { return 1; }
  std::string name() const override { return "field1d"; }
  double value(std::span<const double> x, Batch = {}) const override { return f(x[0]); }
  void gradient(std::span<const double>, std::span<double> out, Batch = {}) const override { out[0] = 0.0; }
};

// -exp(-(|x| - 1)^2 / 0.1): a ring-shaped valley around a local maximum
struct Moat final : ScalarField {
  std::size_t dim() const override { return 2; }
  std::string name() const override { return "moat"; }
  double value(std::span<const double> x, Batch = {}) const override {
    const double r = std::hypot(x[0], x[1]);
    return -std::exp(-(r - 1.0) * (r - 1.0) / 0.1);
  }
  void gradient(std::span<const double>, std::span<double> out, Batch = {}) const override {
    out[0] = out[1] = 0.0;
  }
};

ScalarGrid grid2d(std::vector<double> v, std::size_t rows, std::size_t cols) {
  ScalarGrid g;
  g.values = std::move(v);
  g.box = {{0.0, 1.0}, {0.0, 1.0}};
  g.resolution = {rows, cols};
  return g;
}

}  // namespace

TEST_CASE("grid_sample") {
  DoubleWell dw;
  const auto g = grid_sample(dw, {{-2.0, 2.0}}, {5});
  CHECK(g.values == std::vector<double>{12.0, 0.0, 0.0, 0.0, 12.0});
  const Field1d c([](double) { return 4.0; });
  for (double v : grid_sample(c, {{0.0, 1.0}}, {7}).values) CHECK(v == 4.0);
  const Field1d mono([](double x) { return x * x * x; });
  const auto m = grid_sample(mono, {{-1.0, 2.0}}, {50}).values;
  CHECK(std::is_sorted(m.begin(), m.end()));
  const auto gmm = make_builtin(Builtin::GaussianMixture2d, 7);
  CHECK(grid_sample(*gmm, {{-3, 3}, {-3, 3}}, {64, 80}).values ==
        grid_sample(*gmm, {{-3, 3}, {-3, 3}}, {64, 80}, Exec{4}).values);
  CHECK_THROWS_AS(grid_sample(dw, {{-2.0, 2.0}, {0, 1}}, {5, 5}), DimensionError);
}

TEST_CASE("1D sublevel persistence") {
  const Field1d mono([](double x) { return x; });
  const auto d = sublevel_persistence(grid_sample(mono, {{0.0, 1.0}}, {100}));
  CHECK(d[0].finite.empty());
  CHECK(d[0].essential == std::vector<double>{0.0});

  DoubleWell dw;
  const auto w = sublevel_persistence(grid_sample(dw, {{-2.0, 2.0}}, {4097}))[0];
  REQUIRE(w.essential.size() == 1);
  REQUIRE(w.finite.size() == 1);
  CHECK(std::abs(w.essential[0] + 0.25) < 1e-3);
  CHECK(std::abs(w.finite[0].birth + 0.25) < 1e-3);
  CHECK(std::abs(w.finite[0].death) < 1e-3);
}

TEST_CASE("2D hand grids") {
  // two basins (1 and 2) separated by a ridge of height 5, 4-connectivity
  const auto d = sublevel_persistence(grid2d({1, 5, 2,
                                              6, 5, 6,
                                              7, 8, 9}, 3, 3));
  CHECK(d[0].essential == std::vector<double>{1.0});
  REQUIRE(d[0].finite.size() == 1);
  CHECK(d[0].finite[0] == DiagramPoint{2.0, 5.0});
  CHECK(d[1].finite.empty());
  CHECK(d[1].essential.empty());

  // a ring of low values around a peak: one loop born at the ring's top, dying at the peak
  const auto ring = sublevel_persistence(grid2d({9, 9, 9, 9, 9,
                                                 9, 1, 2, 3, 9,
                                                 9, 2, 7, 2, 9,
                                                 9, 3, 2, 1, 9,
                                                 9, 9, 9, 9, 9}, 5, 5));
  REQUIRE(ring[1].finite.size() == 1);
  CHECK(ring[1].finite[0] == DiagramPoint{3.0, 7.0});
  CHECK(ring[0].essential == std::vector<double>{1.0});
  REQUIRE(ring[0].finite.size() == 1);
  CHECK(ring[0].finite[0] == DiagramPoint{1.0, 3.0});
}

TEST_CASE("circular moat has exactly one loop") {
  Moat moat;
  const auto g = grid_sample(moat, {{-2.0, 2.0}, {-2.0, 2.0}}, {129, 129});
  const auto d = sublevel_persistence(g);
  std::size_t loops = 0;
  for (const auto& p : d[1].finite)
    if (p.death - p.birth > 1e-3) ++loops;
  CHECK(loops == 1);
  CHECK(d[1].essential.empty());
}

TEST_CASE("elder rule and refinement") {
  for (std::uint64_t seed : {1, 7}) {
    const auto f = make_builtin(Builtin::GaussianMixture2d, seed);
    const std::vector<Interval> box = {{-3.5, 3.5}, {-3.5, 3.5}};
    const auto coarse = grid_sample(*f, box, {257, 257});
    const auto fine = grid_sample(*f, box, {513, 513});
    const auto dc = sublevel_persistence(coarse, 0)[0];
    const auto df = sublevel_persistence(fine, 0)[0];
    CHECK(dc.essential[0] == *std::min_element(coarse.values.begin(), coarse.values.end()));
    REQUIRE(dc.finite.size() == df.finite.size());
    // max gradient norm on the box, sampled on the fine lattice
    double lip = 0.0;
    for (std::size_t i = 0; i < 513; i += 4)
      for (std::size_t j = 0; j < 513; j += 4)
        lip = std::max(lip, norm(eval_grad(*f, ParamVector{fine.coordinate(0, i), fine.coordinate(1, j)})));
    const double bound = 2.0 * coarse.spacing(0) * lip;
    for (std::size_t i = 0; i < dc.finite.size(); ++i) {
      CHECK(std::abs(dc.finite[i].birth - df.finite[i].birth) < bound);
      CHECK(std::abs(dc.finite[i].death - df.finite[i].death) < bound);
    }
  }
}

TEST_CASE("brute force bottleneck") {
  const auto a = PersistenceDiagram::make({{0.0, 2.0}, {0.5, 0.7}}, {0.0});
  CHECK(brute_bottleneck(a, a) == 0.0);
  CHECK(brute_bottleneck(PersistenceDiagram::make({{0.0, 2.0}}, {}), PersistenceDiagram::make({}, {})) == 1.0);
  std::vector<DiagramPoint> many;
  for (int i = 0; i < 9; ++i) many.push_back({0.0, 1.0 + i});
  CHECK_THROWS_AS(brute_bottleneck(PersistenceDiagram::make(many, {}), a), ValidationError);
}

TEST_CASE("grid save and load") {
  const auto f = make_builtin(Builtin::GaussianMixture2d, 3);
  const auto g = grid_sample(*f, {{-1.0, 2.0}, {0.0, 1.0}}, {16, 9});
  const auto stem = std::filesystem::temp_directory_path() / "lossbar_test_grid";
  save_grid(g, stem);
  const auto back = load_grid(stem);
  CHECK(back.values == g.values);
  CHECK(back.resolution == g.resolution);
  CHECK(back.box[0].lo == -1.0);
  CHECK(back.box[1].hi == 1.0);
}
