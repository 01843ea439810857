#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace pbh;
using namespace pbh::testing;

namespace {

// Rastrigin without a known minimum, so runs never stop early.
Objective open_rastrigin(int d) {
  const auto r = rastrigin(d);
  return Objective(
      "open-rastrigin", d, [r](const Vector& x) { return r(x); },
      [r](const Vector& x, Vector& g) { return r.value_and_gradient(x, g); });
}

}  // namespace

TEST_CASE("metropolis always accepts improvements") {
  Rng rng = make_rng(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK(metropolis_accept(1.0, 1.0, 1e-300, rng));
    CHECK(metropolis_accept(1.0, 0.5, 1e-300, rng));
    CHECK(metropolis_accept(1.0, -1e300, 5.0, rng));
  }
}

TEST_CASE("metropolis acceptance of a move worse by delta ln 2 is one half") {
  for (double delta : {0.01, 1.0, 30.0}) {
    Rng rng = make_rng(2);
    int accepted = 0;
    for (int i = 0; i < 10000; ++i) {
      accepted += metropolis_accept(1.0, 1.0 + delta * std::log(2.0), delta, rng);
    }
    INFO("delta=" << delta);
    CHECK(std::abs(accepted / 10000.0 - 0.5) <= 0.02);
  }
}

TEST_CASE("metropolis at delta 1e-300 never accepts a worse move") {
  Rng rng = make_rng(3);
  std::uniform_real_distribution<double> gap(1e-12, 10.0);
  for (int i = 0; i < 10000; ++i) CHECK_FALSE(metropolis_accept(0.0, gap(rng), 1e-300, rng));
}

TEST_CASE("basin hopping at vanishing temperature is monotone") {
  PbhConfig c;
  c.delta0 = 1e-300;
  c.gamma0 = 1e300;  // delta * gamma = 1
  c.gamma_max = 1e300;
  c.max_iterations = 10000;
  c.trace_capacity = 0;
  c.seed = 5;
  const auto f = open_rastrigin(2);
  const auto t = run_bh(f, LocalSolver{}, c, Vector::Constant(2, 3.3));
  REQUIRE(t.iterations.size() == 10000);
  int worse_proposals = 0;
  for (const auto& r : t.iterations) {
    if (r.outcome == StepOutcome::worse) {
      ++worse_proposals;
      CHECK_FALSE(r.accepted);
    }
    CHECK(r.delta <= 1e-300);  // the schedule only cools further
  }
  CHECK(worse_proposals > 1000);
  CHECK(trace_monotone(t));
}

TEST_CASE("basin hopping on a single basin converges in one iteration") {
  PbhConfig c;
  const auto t = run_bh(quadratic(3), LocalSolver::lbfgs(10), c, Vector::Constant(3, -2.0));
  CHECK(t.termination == Termination::converged_tol);
  CHECK(t.iterations.size() == 1);
  CHECK(t.final_value == 0.0);
  CHECK(t.algorithm == "bh");
}

TEST_CASE("basin hopping reports the final iterate, not the best one") {
  PbhConfig c;
  c.delta0 = 50.0;
  c.eta2 = 1.0 + 1e-9;
  c.eta1 = 1.0 + 1e-10;
  c.adaptive_delta = false;
  c.max_iterations = 40;
  bool witnessed = false;
  for (std::uint64_t seed = 0; seed < 20 && !witnessed; ++seed) {
    c.seed = seed;
    const auto t = run_bh(open_rastrigin(2), LocalSolver{}, c, Vector::Constant(2, 1.0));
    CHECK_FALSE(t.monotone);
    CHECK(t.final_value == t.iterations.back().f_value);
    double best = t.initial_value;
    for (const auto& r : t.iterations) best = std::min(best, r.f_value);
    witnessed = t.final_value > best;
  }
  CHECK(witnessed);
}

TEST_CASE("zop is pbh with the identity solver") {
  for (std::uint64_t seed : {0u, 7u, 99u}) {
    PbhConfig c;
    c.seed = seed;
    c.max_iterations = 25;
    c.n_samples = 12;
    const Vector x0 = Vector::Constant(3, 2.7);
    const auto z = run_zop(griewank(3), c, x0);
    const auto p = run_pbh(griewank(3), LocalSolver::identity(), c, x0);
    CHECK(z.algorithm == "zop");
    CHECK(traces_identical(z, p));
  }
}

TEST_CASE("zop decreases a quadratic monotonically") {
  PbhConfig c;
  c.n_samples = 200;
  c.delta0 = 0.01;
  c.max_iterations = 60;
  c.seed = 8;
  const Vector x0 = Vector::Constant(2, 1.0);
  const auto t = run_zop(quadratic(2), c, x0);
  CHECK(trace_monotone(t));
  CHECK(t.final_value < 1e-2 * quadratic(2)(x0));
}

TEST_CASE("zop at vanishing temperature picks the best raw sample") {
  const auto f = rastrigin(2);
  Rng a = make_rng(12), b = make_rng(12);
  const Vector x = Vector::Constant(2, 1.5);
  const auto r = pbh_step(f, LocalSolver::identity(), a, x, 1e12, 1e-12, 30);
  const auto ys = draw_samples(b, x, 1e-12, 1e12, 30);
  std::size_t best = 0;
  for (std::size_t i = 1; i < ys.size(); ++i) {
    if (f(ys[i]) < f(ys[best])) best = i;
  }
  CHECK(r.candidate == ys[best]);
}
