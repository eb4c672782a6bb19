#include "doctest.h"

#include <cmath>
#include <random>

#include "lossbar/barcode.hpp"
#include "lossbar/error.hpp"
#include "lossbar/landscape.hpp"
#include "lossbar/oracle.hpp"

using namespace lossbar;

namespace {

PersistenceDiagram random_diagram(std::mt19937_64& rng, std::size_t max_points, double essential) {
  std::uniform_int_distribution<std::size_t> count(0, max_points);
  std::uniform_real_distribution<double> birth(-1.0, 1.0), len(0.0, 1.5);
  std::vector<DiagramPoint> pts;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double b = birth(rng);
    pts.push_back({b, b + len(rng)});
  }
  return PersistenceDiagram::make(std::move(pts), {essential});
}

Minimum at(double x, const ScalarField& f) {
  Minimum m;
  m.params = ParamVector{x};
  m.loss = f.value(m.params.span());
  m.converged = true;
  return m;
}

}  // namespace

TEST_CASE("diagrams from barcodes") {
  const auto single = to_diagram(ideal_barcode(0.0));
  CHECK(single.essential == std::vector<double>{0.0});
  CHECK(single.finite.empty());

  Barcode dw{{-0.25, kInf, 0}, {{-0.25, 0.0, 1}}};
  const auto d = to_diagram(dw);
  CHECK(d.essential == std::vector<double>{-0.25});
  REQUIRE(d.finite.size() == 1);
  CHECK(d.finite[0] == DiagramPoint{-0.25, 0.0});

  Barcode flat{{0.0, kInf, 0}, {{1.0, 1.0, 1}}};
  CHECK(to_diagram(flat).finite.empty());
}

TEST_CASE("barcode validation") {
  Barcode bad{{0.0, kInf, 0}, {{1.0, 0.5, 1}}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  Barcode finite_essential{{0.0, 3.0, 0}, {}};
  CHECK_THROWS_AS(finite_essential.validate(), ValidationError);
}

TEST_CASE("bottleneck examples") {
  const auto empty = PersistenceDiagram::make({}, {0.0});
  const auto one = PersistenceDiagram::make({{0.0, 2.0}}, {0.0});
  CHECK(bottleneck_distance(one, one) == 0.0);
  CHECK(bottleneck_distance(one, empty) == 1.0);
  CHECK(bottleneck_distance(PersistenceDiagram::make({{0.0, 1.0}}, {}),
                            PersistenceDiagram::make({{0.5, 1.0}}, {})) == 0.5);
  CHECK(std::isinf(bottleneck_distance(empty, PersistenceDiagram::make({}, {0.0, 1.0}))));
  CHECK(bottleneck_distance(PersistenceDiagram::make({}, {0.0}), PersistenceDiagram::make({}, {0.3})) ==
        doctest::Approx(0.3));
}

TEST_CASE("bottleneck agrees with brute force and is a pseudometric") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_diagram(rng, 6, 0.0);
    const auto b = random_diagram(rng, 6, 0.1);
    const auto c = random_diagram(rng, 6, -0.2);
    const double ab = bottleneck_distance(a, b);
    CHECK(std::abs(ab - oracle::brute_bottleneck(a, b)) <= 1e-12);
    CHECK(ab == bottleneck_distance(b, a));
    CHECK(bottleneck_distance(a, a) == 0.0);
    CHECK(bottleneck_distance(a, c) <= ab + bottleneck_distance(b, c) + 1e-12);
  }
}

TEST_CASE("TO-score") {
  CHECK(to_score(ideal_barcode(1.5)) == 0.0);
  Barcode dw{{-0.25, kInf, 0}, {{-0.25, 0.0, 1}}};
  CHECK(to_score(dw) == doctest::Approx(0.125).epsilon(1e-15));
  Barcode b{{-1.0, kInf, 0}, {{-0.7, 0.1, 1}, {-0.3, -0.2, 2}}};
  const double s = to_score(b);
  CHECK(s == doctest::Approx(0.4));
  CHECK(s == bottleneck_distance(to_diagram(b), to_diagram(ideal_barcode(-1.0))));
  // shifting every level shifts the ideal barcode too
  Barcode shifted = b;
  shifted.essential.birth += 0.5;
  for (auto& seg : shifted.segments) seg.birth += 0.5, seg.death += 0.5;
  CHECK(to_score(shifted) == doctest::Approx(s).epsilon(1e-15));
}

TEST_CASE("level order breaks near ties by id") {
  const std::vector<double> losses = {0.5, 0.1, 0.1 + 1e-12, 0.3};
  const std::vector<std::size_t> ids = {0, 7, 2, 3};
  const auto order = level_order(losses, ids);
  CHECK(order == std::vector<std::size_t>{2, 1, 3, 0});
  const auto keys = level_keys(losses, ids);
  CHECK(keys[1] == keys[2]);
}

TEST_CASE("compute_barcode") {
  DoubleWell dw;
  const double w = 1.0 / std::sqrt(2.0);
  BarcodeConfig cfg;

  SUBCASE("empty input") { CHECK_THROWS_AS(compute_barcode({}, dw, cfg), ValidationError); }

  SUBCASE("single minimum") {
    const auto r = compute_barcode({at(w, dw)}, dw, cfg);
    CHECK(r.barcode.segments.empty());
    CHECK(r.barcode.essential.birth == dw.value(ParamVector{w}.span()));
  }

  SUBCASE("double well") {
    const auto r = compute_barcode({at(w, dw), at(-w, dw)}, dw, cfg);
    CHECK(r.barcode.essential.birth == doctest::Approx(-0.25).epsilon(1e-12));
    REQUIRE(r.barcode.segments.size() == 1);
    CHECK(r.barcode.segments[0].birth == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(std::abs(r.barcode.segments[0].death) < 1e-3);
    CHECK(r.pairs.size() == 1);
  }

  SUBCASE("duplicates are merged") {
    const auto r = compute_barcode({at(w, dw), at(-w, dw), at(w + 1e-9, dw)}, dw, cfg);
    CHECK(r.barcode.segments.size() == 1);
    CHECK(r.dropped_duplicates.size() == 1);
  }

  SUBCASE("mixture field against its reference minima") {
    const auto f = make_builtin(Builtin::GaussianMixture2d, 7);
    const auto& ref = dynamic_cast<const GaussianMixture2d&>(*f).reference_minima();
    std::vector<Minimum> minima;
    for (const auto& p : ref) minima.push_back({p, f->value(p.span()), 0.0, 0.0, 0, 0, true});
    const auto r = compute_barcode(minima, *f, cfg);
    CHECK(r.barcode.segments.size() == ref.size() - 1);
    CHECK(r.barcode.essential.birth == minima.front().loss);
    for (const auto& s : r.barcode.segments) CHECK(s.death >= s.birth);
    // more epochs never raise h_p beyond noise
    BarcodeConfig longer = cfg;
    longer.path.epochs *= 2;
    const auto r2 = compute_barcode(minima, *f, longer);
    for (std::size_t i = 0; i < r.barcode.segments.size(); ++i)
      CHECK(r2.barcode.segments[i].death <= r.barcode.segments[i].death + 1e-6);
    // the parallel run is identical
    CHECK(compute_barcode(minima, *f, cfg, Exec{4}).barcode == r.barcode);
  }
}
