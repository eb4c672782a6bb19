#include "doctest.h"

#include <cmath>
#include <random>

#include "lossbar/error.hpp"
#include "lossbar/landscape.hpp"
#include "lossbar/trainer.hpp"

using namespace lossbar;

TEST_CASE("scheduler examples") {
  const auto fixed = SchedulerSpec::constant(0.03);
  for (std::size_t i : {0, 1, 10, 100000}) CHECK(schedule_lr(fixed, i) == 0.03);

  const SchedulerSpec s{10, 80, 1e-2, 1e-4, 100};
  CHECK(schedule_lr(s, 500) == 1e-2);
  CHECK(schedule_lr(s, 4500) == doctest::Approx(5.05e-3).epsilon(1e-12));
  CHECK(schedule_lr(s, 1000) == 1e-2);
  CHECK(schedule_lr(s, 8000) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(schedule_lr(s, 9000) == 1e-4);
}

TEST_CASE("scheduler validation") {
  CHECK_THROWS_AS((SchedulerSpec{5, 2, 1e-2, 1e-3, 1}.validate()), ValidationError);
  CHECK_THROWS_AS((SchedulerSpec{0, 0, 0, -1, 1}.validate()), ValidationError);
  CHECK_THROWS_AS((SchedulerSpec{0, 1, 1e-2, 1e-3, 0}.validate()), ValidationError);
}

TEST_CASE("quadratic bowl converges") {
  QuadraticBowl bowl;
  TrainConfig cfg;
  cfg.momentum = 0.0;
  cfg.tol = 1e-8;
  const auto m = find_minimum(bowl, ParamVector{1.0, 1.0}, cfg);
  CHECK(m.converged);
  CHECK(norm(m.params) < cfg.tol);
  CHECK(m.loss < cfg.tol * cfg.tol);
  CHECK(m.grad_norm <= cfg.tol);
}

TEST_CASE("double well basins") {
  DoubleWell dw;
  TrainConfig cfg;
  const auto right = find_minimum(dw, ParamVector{0.3}, cfg);
  CHECK(right.converged);
  CHECK(right.params[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(std::abs(right.loss + 0.25) < 1e-6);
  const auto left = find_minimum(dw, ParamVector{-0.3}, cfg);
  CHECK(left.params[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("unconverged descent reports the best iterate") {
  DoubleWell dw;
  TrainConfig cfg;
  cfg.max_steps = 3;
  std::vector<double> trace;
  cfg.loss_trace = &trace;
  const auto m = find_minimum(dw, ParamVector{0.3}, cfg);
  CHECK_FALSE(m.converged);
  CHECK(m.loss == *std::min_element(trace.begin(), trace.end()));
}

TEST_CASE("divergence names the step") {
  DoubleWell dw;
  TrainConfig cfg;
  cfg.scheduler = SchedulerSpec::constant(10.0);
  try {
    find_minimum(dw, ParamVector{1.5}, cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step() > 0);
  }
}

TEST_CASE("sample_minima is deterministic for any worker count") {
  const auto f = make_builtin(Builtin::GaussianMixture2d, 7);
  TrainConfig cfg;
  const auto a = sample_minima(*f, 10, 7, 2.5, cfg);
  const auto b = sample_minima(*f, 10, 7, 2.5, cfg, Exec{4});
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].params == b[i].params);
    CHECK(a[i].loss == b[i].loss);
    CHECK(a[i].seed == b[i].seed);
    if (a[i].converged) CHECK(a[i].grad_norm <= cfg.tol);
  }
}

TEST_CASE("both double-well basins are discovered for some seed") {
  DoubleWell dw;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 50 && !found; ++seed) {
    const auto m = sample_minima(dw, 2, seed, 1.0, TrainConfig{});
    found = m[0].params[0] * m[1].params[0] < 0;
  }
  CHECK(found);
}

TEST_CASE("single bowl minimum") {
  const auto m = sample_minima(QuadraticBowl(), 1, 0, 1.0, TrainConfig{});
  CHECK(m[0].loss < 1e-10);
}
