#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace pbh;
using namespace pbh::testing;
using Catch::Matchers::WithinRel;

namespace {

Vector v1(double a) {
  Vector x(1);
  x << a;
  return x;
}

double rastrigin_1d(double x) {
  return x * x + 10.0 * (1.0 - std::cos(2.0 * std::numbers::pi * x));
}

Objective constant_objective(int d) {
  return Objective(
      "constant", d, [](const Vector&) { return 1.0; },
      [](const Vector& x, Vector& g) {
        g = Vector::Zero(x.size());
        return 1.0;
      });
}

}  // namespace

TEST_CASE("config validation") {
  PbhConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.eta2 = bad.eta1;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = c;
  bad.eta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = c;
  bad.gamma0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = c;
  bad.sample_growth = 0.9;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = c;
  bad.n_samples = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = c;
  bad.budget_seconds = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("outcome classification is exact") {
  CHECK(classify(1.0, 2.0) == StepOutcome::strict);
  CHECK(classify(2.0, 2.0) == StepOutcome::equal);
  CHECK(classify(std::nextafter(2.0, 3.0), 2.0) == StepOutcome::worse);
  CHECK(classify(std::nextafter(2.0, 1.0), 2.0) == StepOutcome::strict);
}

TEST_CASE("step on a single basin never gets worse") {
  // The local solver must actually reach the minimizer; a truncated descent
  // can land the candidate above an x that is already near the bottom.
  const auto f = quadratic(3);
  const auto s = LocalSolver::lbfgs(10);
  Rng rng = make_rng(1);
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Vector x = uniform_point(rng, 3, -4.0, 4.0) * std::pow(10.0, logu(rng));
    const double gamma = std::pow(10.0, logu(rng)), delta = std::pow(10.0, logu(rng));
    const auto r = pbh_step(f, s, rng, x, gamma, delta, 1 + i % 20);
    CHECK(r.f_next <= f(x));
    CHECK(r.improved != StepOutcome::worse);
    CHECK(r.f_next == f(r.x_next));
  }
}

TEST_CASE("a single sample is its own barycenter") {
  const auto f = rastrigin(2);
  const LocalSolver s;
  Rng a = make_rng(9), b = make_rng(9);
  const Vector x = Vector::Constant(2, 2.2);
  const auto r = pbh_step(f, s, a, x, 5.0, 0.5, 1);
  const auto y = draw_samples(b, x, 0.5, 5.0, 1);
  const Vector m = s.solve(f, y.front());
  REQUIRE(r.samples.minimized_points.size() == 1);
  CHECK(r.samples.minimized_points.front() == m);
  CHECK(weighted_mean(r.samples) == m);
  CHECK(r.candidate == s.solve(f, m));
}

TEST_CASE("rejection returns the current point") {
  // A candidate can only be worse than x when x sits below everything sampled.
  const auto f = rastrigin(1);
  const LocalSolver none = LocalSolver::identity();
  Rng rng = make_rng(4);
  int rejected = 0;
  for (int i = 0; i < 50; ++i) {
    const auto r = pbh_step(f, none, rng, v1(0.0), 1.0, 1.0, 3);
    if (r.improved == StepOutcome::worse) {
      ++rejected;
      CHECK(r.x_next == v1(0.0));
      CHECK(r.f_next == 0.0);
      CHECK(r.candidate_value > 0.0);
    }
  }
  CHECK(rejected == 50);
}

TEST_CASE("1D rastrigin hops from the minimizer near 2 toward the origin") {
  // Grid oracle for the local minimizer near 2.
  const double m2 = grid_argmin(rastrigin_1d, 1.5, 2.5, 1000000);
  CHECK(std::abs(m2 - 1.9899) < 1e-3);

  const auto f = rastrigin(1);
  LocalSolver s;
  s.max_steps = 10;
  int strict = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed);
    const auto r = pbh_step(f, s, rng, v1(m2), 5.0, 0.5, 50);
    strict += r.improved == StepOutcome::strict;
  }
  CHECK(strict >= 15);
}

TEST_CASE("quadratic converges after one effective step") {
  PbhConfig c;
  c.n_samples = 5;
  c.seed = 3;
  const auto lb = LocalSolver::lbfgs(10);
  const auto t = run_pbh(quadratic(4), lb, c, Vector::Constant(4, 2.5));
  CHECK(t.termination == Termination::converged_tol);
  CHECK(t.iterations.size() == 1);
  CHECK(quadratic(4).gradient(t.final_point).norm() <= lb.grad_tolerance);
}

TEST_CASE("trace invariants over seeds") {
  const auto f = rastrigin(3);
  const LocalSolver s;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (bool adaptive : {true, false}) {
      PbhConfig c;
      c.seed = seed;
      c.n_samples = 15;
      c.max_iterations = 30;
      c.adaptive_delta = adaptive;
      Rng rng = make_rng(seed, 1);
      const auto t = run_pbh(f, s, c, uniform_point(rng, 3, -5.0, 5.0));
      CHECK(trace_monotone(t));
      CHECK(gamma_nondecreasing(t));
      CHECK(t.monotone);
      CHECK(t.final_value == t.iterations.back().f_value);
      CHECK(t.final_point == t.iterations.back().iterate);
      for (std::size_t i = 1; i < t.iterations.size(); ++i) {
        if (adaptive) {
          CHECK(t.iterations[i].delta <= t.iterations[i - 1].delta);
        } else {
          CHECK(t.iterations[i].delta < t.iterations[i - 1].delta);
        }
      }
    }
  }
}

TEST_CASE("gamma grows by eta1 on every stagnating iteration") {
  PbhConfig c;
  c.max_iterations = 12;
  c.n_samples = 3;
  c.eta1 = 1.3;
  const auto t = run_pbh(constant_objective(2), LocalSolver{}, c, Vector::Zero(2));
  REQUIRE(t.iterations.size() == 12);
  double expected = c.gamma0;
  for (std::size_t k = 0; k < t.iterations.size(); ++k) {
    CHECK(t.iterations[k].outcome == StepOutcome::equal);
    CHECK(t.iterations[k].gamma == expected);
    CHECK_THAT(t.iterations[k].gamma, WithinRel(c.gamma0 * std::pow(1.3, double(k)), 1e-13));
    expected *= c.eta1;
  }
}

TEST_CASE("sample counts follow N0 C^k") {
  PbhConfig c;
  c.n_samples = 3;
  c.sample_growth = 2.0;
  c.max_iterations = 8;
  for (long k = 0; k < 8; ++k) CHECK(c.samples_at(k) == 3L << k);
  c.sample_growth = 1.5;
  CHECK(c.samples_at(3) == 10);  // round(3 * 3.375) = round(10.125)
  c.max_samples = 50;
  CHECK(c.samples_at(20) == 50);

  c.sample_growth = 2.0;
  c.max_samples = 1L << 20;
  const auto t = run_pbh(constant_objective(1), LocalSolver{}, c, v1(0.0));
  for (std::size_t k = 0; k < t.iterations.size(); ++k) CHECK(t.iterations[k].n_samples == (3L << k));
}

TEST_CASE("bounded traces keep a strided subsequence and the latest iterate") {
  PbhConfig c;
  c.n_samples = 2;
  c.max_iterations = 1000;
  c.seed = 6;
  c.trace_capacity = 0;
  const Vector x0 = Vector::Constant(2, 4.0);
  LocalSolver s;
  s.max_steps = 2;
  // No known minimum, so every run lasts the full 1000 iterations.
  const auto r2 = rastrigin(2);
  const Objective f("open-rastrigin", 2, [r2](const Vector& x) { return r2(x); },
                    [r2](const Vector& x, Vector& g) { return r2.value_and_gradient(x, g); });
  const auto full = run_pbh(f, s, c, x0);
  REQUIRE(full.iterations.size() == 1000);
  for (long cap : {16L, 100L, 999L, 1000L}) {
    c.trace_capacity = cap;
    const auto t = run_pbh(f, s, c, x0);
    INFO("capacity " << cap);
    CHECK(t.iterations_run == 1000);
    CHECK(static_cast<long>(t.iterations.size()) <= cap);
    CHECK(t.iterations.front().index == 0);
    CHECK(t.iterations.back().index == 999);
    CHECK(t.final_value == t.iterations.back().f_value);
    if (cap == 1000) {
      CHECK(t.record_stride == 1);
      CHECK(t.iterations.size() == 1000);
    } else {
      CHECK(t.record_stride > 1);
    }
    for (std::size_t i = 0; i < t.iterations.size(); ++i) {
      const auto& r = t.iterations[i];
      if (i + 1 < t.iterations.size()) CHECK(r.index % t.record_stride == 0);
      if (i > 0) CHECK(r.index > t.iterations[i - 1].index);
      const auto& ref = full.iterations[static_cast<std::size_t>(r.index)];
      CHECK(r.iterate == ref.iterate);
      CHECK(r.f_value == ref.f_value);
      CHECK(r.gamma == ref.gamma);
    }
    CHECK(trace_monotone(t));
  }
  c.trace_capacity = 3;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("runs are reproducible and independent of the worker count") {
  const auto f = griewank(4);
  PbhConfig c;
  c.seed = 31;
  c.max_iterations = 15;
  c.workers = 1;
  const Vector x0 = Vector::Constant(4, 30.0);
  const auto a = run_pbh(f, LocalSolver{}, c, x0);
  const auto b = run_pbh(f, LocalSolver{}, c, x0);
  c.workers = 4;
  const auto p = run_pbh(f, LocalSolver{}, c, x0);
  CHECK(traces_identical(a, b));
  CHECK(traces_identical(a, p));
  c.seed = 32;
  CHECK_FALSE(traces_identical(a, run_pbh(f, LocalSolver{}, c, x0)));
}

TEST_CASE("run_pbh stops on the wall-clock budget") {
  PbhConfig c;
  c.max_iterations = 1000000000;
  c.budget_seconds = 0.2;
  c.n_samples = 10;
  const auto t = run_pbh(constant_objective(3), LocalSolver{}, c, Vector::Zero(3));
  CHECK(t.termination == Termination::budget);
  CHECK(!t.iterations.empty());
  CHECK(t.iterations.back().elapsed_seconds >= 0.2);
}

TEST_CASE("run_pbh rejects bad starts") {
  PbhConfig c;
  Vector x = Vector::Zero(2);
  x[0] = std::nan("");
  CHECK_THROWS_AS(run_pbh(rastrigin(2), LocalSolver{}, c, x), InvalidInput);
  CHECK_THROWS_AS(run_pbh(rastrigin(2), LocalSolver{}, c, Vector::Zero(3)), InvalidDimension);
}

TEST_CASE("adaptive temperature update") {
  const std::vector<double> vals{0.0, 1.0, 1.0};
  const std::vector<Vector> pts{v1(0.0), v1(1.0), v1(1.0)};

  // Concentrated: unchanged.
  CHECK(adaptive_delta_update(10.0, 2.0, vals, pts, 0.0) == 10.0);
  CHECK(adaptive_delta_update(10.0, 2.0, vals, pts, 1e-10) == 10.0);

  // Failed: threshold 1/ln 4 ~ 0.72 clamped into [10/4, 10/2].
  CHECK(adaptive_delta_update(10.0, 2.0, vals, pts, 1.0) == 2.5);
  // Inside the clamp window [2/4, 2/2] the threshold itself is returned.
  CHECK_THAT(adaptive_delta_update(2.0, 2.0, vals, pts, 1.0), WithinRel(1.0 / std::log(4.0), 1e-15));

  // Tied best values have no threshold: plain division by eta2.
  const std::vector<double> tied{0.0, 0.0, 1.0};
  const std::vector<Vector> tied_pts{v1(0.0), v1(3.0), v1(1.0)};
  CHECK(adaptive_delta_update(1.0, 2.0, tied, tied_pts, 0.5) == 0.5);

  // One distinct minimizer only.
  CHECK(adaptive_delta_update(1.0, 2.0, std::vector<double>{0.0}, std::vector<Vector>{v1(0.0)}, 0.5) ==
        0.5);

  // Repeated failures strictly decrease delta.
  double d = 10.0;
  for (int i = 0; i < 40; ++i) {
    const double next = adaptive_delta_update(d, 2.0, vals, pts, 1.0);
    CHECK(next < d);
    d = next;
  }
}
