#include "doctest.h"

#include <cmath>
#include <random>

#include "lossbar/barcode.hpp"
#include "lossbar/error.hpp"
#include "lossbar/landscape.hpp"
#include "lossbar/morse.hpp"
#include "lossbar/oracle.hpp"

using namespace lossbar;

namespace {

std::vector<Minimum> reference_minima(std::uint64_t seed, FieldPtr& field) {
  field = make_builtin(Builtin::GaussianMixture2d, seed);
  std::vector<Minimum> out;
  for (const auto& p : dynamic_cast<const GaussianMixture2d&>(*field).reference_minima())
    out.push_back({p, field->value(p.span()), 0.0, 0.0, seed, 0, true});
  return out;
}

Minimum point(const ScalarField& f, ParamVector p) {
  const double v = f.value(p.span());
  return {std::move(p), v, 0.0, 0.0, 0, 0, true};
}

bool all_zero(const BoundaryMatrix& m) {
  for (const auto& col : m)
    if (!col.empty()) return false;
  return true;
}

PathConfig quick() {
  PathConfig c;
  c.epochs = 60;
  return c;
}

}  // namespace

TEST_CASE("barycentric grid indexing") {
  for (std::size_t d : {1u, 4u, 6u, 8u}) {
    std::size_t expected = 0;
    for (std::size_t b = 0; b <= d; ++b)
      for (std::size_t c = 0; b + c <= d; ++c) CHECK(tri_index(d, b, c) == expected++);
    CHECK(expected == tri_point_count(d));
  }
}

TEST_CASE("hand-reduced triangle") {
  FiltrationComplex cx;
  cx.add({0}, 0);
  cx.add({1}, 1);
  cx.add({2}, 2);
  cx.add({0, 1}, 3);
  cx.add({1, 2}, 4);
  cx.add({0, 2}, 5);
  cx.add({0, 1, 2}, 6);
  CHECK(all_zero(compose(cx.boundary(1), cx.boundary(2))));
  const auto d = reduce(cx);
  REQUIRE(d.size() == 3);
  CHECK(d[0].essential == std::vector<double>{0});
  CHECK(d[0].finite == std::vector<DiagramPoint>{{1, 3}, {2, 4}});
  CHECK(d[1].finite == std::vector<DiagramPoint>{{5, 6}});
  CHECK(d[1].essential.empty());
  CHECK(d[2].finite.empty());
  CHECK(d[2].essential.empty());
  CHECK(index_r_to_score(d, 1) == 0.5);
  CHECK(index_r_to_score(d, 0) == 1.0);
  CHECK_THROWS_AS(index_r_to_score(d, 3), ValidationError);
}

TEST_CASE("small complexes") {
  const auto one = reduce(complex_from_values({{4, 1.5}}, {}));
  CHECK(one[0].essential == std::vector<double>{1.5});
  CHECK(one[0].finite.empty());

  const auto two = reduce(complex_from_values({{0, 0.25}, {1, 0.5}}, {{{0, 1}, 0.75}}));
  CHECK(two[0].essential == std::vector<double>{0.25});
  CHECK(two[0].finite == std::vector<DiagramPoint>{{0.5, 0.75}});
  CHECK(index_r_to_score(two, 1) == 0.0);
}

TEST_CASE("complex bookkeeping") {
  FiltrationComplex cx;
  cx.add({0}, 0);
  CHECK_THROWS_AS(cx.add({0, 1}, 1), ValidationError);
  cx.add({1}, 2);
  CHECK_THROWS_AS(cx.add({1}, 2), ValidationError);
  cx.add({1, 0}, 1);
  CHECK(cx.index_of({0, 1}) == 0);
  CHECK_FALSE(cx.monotone());
  CHECK_THROWS_AS(reduce(cx), ValidationError);
  CHECK(cx.clamp_monotone() == 1);
  CHECK(cx.monotone());
  CHECK(cx.simplices(1)[0].value == 2);
  CHECK(cx.clamp_count == 1);
}

TEST_CASE("edges are optimised paths") {
  FieldPtr f;
  const auto m = reference_minima(7, f);
  const auto s = optimize_simplex(*f, {{3, m[2]}, {1, m[0]}}, 8, quick());
  const auto r = optimize_path(*f, m[0], m[2], [] {
    auto c = quick();
    c.n_points = 7;
    return c;
  }());
  CHECK(s.vertex_ids == std::vector<std::size_t>{1, 3});
  CHECK(s.filtration_value == r.best_max);
  CHECK(s.sample_points == r.best_path.points);
  CHECK(simplex_max_loss(*f, s, quick().alpha_grid) == s.filtration_value);
}

TEST_CASE("triangles") {
  QuadraticBowl bowl;
  const double pi = std::acos(-1.0);
  std::vector<std::pair<std::size_t, Minimum>> circle;
  for (std::size_t k = 0; k < 3; ++k)
    circle.emplace_back(k, point(bowl, ParamVector{std::cos(2 * pi * k / 3), std::sin(2 * pi * k / 3)}));

  SUBCASE("no epochs gives the straight simplex") {
    PathConfig cfg;
    cfg.epochs = 0;
    const auto s = optimize_simplex(bowl, circle, 6, cfg);
    SampledSimplex flat = s;
    for (std::size_t b = 0; b <= 6; ++b)
      for (std::size_t c = 0; b + c <= 6; ++c) {
        ParamVector p(2);
        for (std::size_t x = 0; x < 2; ++x)
          p[x] = ((6.0 - b - c) * circle[0].second.params[x] + b * circle[1].second.params[x] +
                  c * circle[2].second.params[x]) / 6.0;
        flat.sample_points[tri_index(6, b, c)] = p;
      }
    CHECK(s.filtration_value == doctest::Approx(simplex_max_loss(bowl, flat, cfg.alpha_grid)).epsilon(1e-15));
  }

  SUBCASE("convex bowl descends every epoch") {
    // a tilted triangle in 3D so the interior has a normal direction to move in
    QuadraticBowl bowl3(3);
    std::vector<std::pair<std::size_t, Minimum>> v;
    for (std::size_t k = 0; k < 3; ++k)
      v.emplace_back(k, point(bowl3, ParamVector{std::cos(2 * pi * k / 3), std::sin(2 * pi * k / 3), 0.8}));
    PathConfig cfg;
    cfg.epochs = 100;
    const auto s = optimize_simplex(bowl3, v, 6, cfg);
    REQUIRE(s.interior_trace.size() == 101);
    for (std::size_t e = 1; e < s.trace.size(); ++e) {
      CHECK(s.trace[e] <= s.trace[e - 1]);
      CHECK(s.interior_trace[e] <= s.interior_trace[e - 1]);
    }
    CHECK(s.interior_trace.back() < s.interior_trace.front());
  }

  SUBCASE("faces are shared exactly") {
    FieldPtr f;
    const auto m = reference_minima(7, f);
    const auto e01 = optimize_simplex(*f, {{0, m[0]}, {1, m[1]}}, 6, quick());
    const auto e02 = optimize_simplex(*f, {{0, m[0]}, {2, m[2]}}, 6, quick());
    const auto e12 = optimize_simplex(*f, {{1, m[1]}, {2, m[2]}}, 6, quick());
    const auto t = optimize_simplex(*f, {{0, m[0]}, {1, m[1]}, {2, m[2]}}, 6, quick(), {&e01, &e02, &e12});
    for (std::size_t i = 0; i <= 6; ++i) {
      CHECK(t.sample_points[tri_index(6, i, 0)] == e01.sample_points[i]);
      CHECK(t.sample_points[tri_index(6, 0, i)] == e02.sample_points[i]);
      CHECK(t.sample_points[tri_index(6, 6 - i, i)] == e12.sample_points[i]);
    }
    CHECK(t.filtration_value >= std::max({e01.filtration_value, e02.filtration_value, e12.filtration_value}));
    CHECK(simplex_max_loss(*f, t, quick().alpha_grid) == t.filtration_value);
  }

  SUBCASE("collinear vertices have no tangent plane") {
    QuadraticBowl bowl3(3);
    std::vector<std::pair<std::size_t, Minimum>> v = {{0, point(bowl3, ParamVector{-1.0, 0.0, 0.0})},
                                                      {1, point(bowl3, ParamVector{0.5, 0.0, 0.0})},
                                                      {2, point(bowl3, ParamVector{1.0, 0.0, 0.0})}};
    try {
      optimize_simplex(bowl3, v, 6, quick());
      FAIL("expected DegenerateError");
    } catch (const DegenerateError& e) {
      CHECK(std::string(e.what()).find("grid point (") != std::string::npos);
    }
  }
}

TEST_CASE("built complexes") {
  FieldPtr f;
  const auto m = reference_minima(7, f);
  MorseConfig cfg;
  cfg.path = quick();

  const auto three = build_complex({m.begin(), m.begin() + 3}, *f, 2, cfg);
  CHECK(three.simplices(0).size() == 3);
  CHECK(three.simplices(1).size() == 3);
  CHECK(three.simplices(2).size() == 1);

  const auto five = build_complex({m.begin(), m.begin() + 5}, *f, 2, cfg, Exec{3});
  CHECK(five.simplices(1).size() == 10);
  CHECK(five.simplices(2).size() == 10);
  CHECK(all_zero(compose(five.boundary(1), five.boundary(2))));
  CHECK(five.monotone());
  const auto d = reduce(five);
  CHECK(d[0].essential.size() == 1);
  CHECK(index_r_to_score(d, 1) >= 0.0);

  // serial and parallel builds agree
  const auto serial = build_complex({m.begin(), m.begin() + 5}, *f, 2, cfg);
  for (int r = 0; r <= 2; ++r)
    for (std::size_t i = 0; i < serial.simplices(r).size(); ++i)
      CHECK(serial.simplices(r)[i].value == five.simplices(r)[i].value);
}

TEST_CASE("1-skeleton reduction matches the barcode of minima") {
  for (std::uint64_t seed : {3, 7}) {
    FieldPtr f;
    const auto m = reference_minima(seed, f);
    BarcodeConfig bc;
    bc.path = quick();
    const auto r = compute_barcode(m, *f, bc);
    std::vector<std::pair<std::size_t, double>> verts;
    for (std::size_t i = 0; i < m.size(); ++i) verts.emplace_back(i, m[i].loss);
    std::vector<Simplex> edges;
    for (const auto& p : r.pairs) edges.push_back({{std::min(p.from, p.to), std::max(p.from, p.to)}, p.max_loss});
    std::sort(edges.begin(), edges.end(), [](const Simplex& a, const Simplex& b) { return a.vertices < b.vertices; });
    const auto d = reduce(complex_from_values(verts, edges));
    CHECK(d[0] == to_diagram(r.barcode));
  }
}

TEST_CASE("reduce agrees with the grid oracle") {
  FieldPtr f;
  const auto m = reference_minima(7, f);
  MorseConfig cfg;
  const auto cx = build_complex(m, *f, 1, cfg);
  const auto d = reduce(cx);
  const auto grid = oracle::grid_sample(*f, {{-3.5, 3.5}, {-3.5, 3.5}}, {513, 513});
  CHECK(bottleneck_distance(d[0], oracle::sublevel_persistence(grid, 0)[0]) < 0.05);
}
