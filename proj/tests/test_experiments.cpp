#include "yr/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace yr;

TEST_CASE("cauchy_monotone: one inversion within 10%") {
  int inv = -1;
  CHECK(cauchy_monotone({4.0, 2.0, 1.0}, &inv));
  CHECK(inv == 0);
  CHECK(cauchy_monotone({4.0, 2.0, 2.1, 1.0}, &inv));
  CHECK(inv == 1);
  CHECK_FALSE(cauchy_monotone({4.0, 2.0, 2.3, 1.0}));
  CHECK_FALSE(cauchy_monotone({4.0, 4.1, 2.0, 2.1}, &inv));
  CHECK(inv == 2);
}

TEST_CASE("power_law_branch: sign-preserving power") {
  const TimeGrid g(1.0, 3);
  Eigen::MatrixXd v(4, 1);
  v << 0.0, -0.5, 2.0, -3.0;
  const SampledPath x = power_law_branch(SampledPath(g, v), 0.5);
  CHECK(x.values(1, 0) == doctest::Approx(-0.25));
  CHECK(x.values(2, 0) == doctest::Approx(4.0));
  CHECK(x.values(3, 0) == doctest::Approx(-9.0));
  const SampledPath y = power_law_branch(SampledPath(g, v), 2.0 / 3.0);
  CHECK(y.values(2, 0) == doctest::Approx(8.0));
}

TEST_CASE("demo_nonuniqueness: small run separates") {
  NonuniquenessConfig c;
  c.n_steps = 1 << 11;
  c.levels = 3;
  c.space_cells = 1024;
  const NonuniquenessResult r = demo_nonuniqueness(c);
  REQUIRE(r.levels.size() == 3);
  CHECK(r.levels.front().n_steps == (1 << 9));
  CHECK(r.levels.back().n_steps == (1 << 11));
  CHECK(r.zero_residual_exact);
  CHECK(r.levels.back().residual_branch < r.levels.front().residual_branch);
  CHECK(r.min_separation == doctest::Approx(1.0));
  CHECK(r.probe.verdict == Verdict::separate);
  CHECK(r.probe.candidates.size() == default_strategies().size() + 2);

  c.levels = 12;
  CHECK_THROWS_AS(demo_nonuniqueness(c), std::invalid_argument);
}

TEST_CASE("demo_regularization: small run") {
  RegularizationConfig c;
  c.n_steps = 128;
  c.space_cells = 64;
  c.eps_last = 5;
  const RegularizationResult r = demo_regularization(c);
  CHECK(r.epsilons.size() == 4);
  CHECK(r.increments.size() == 3);
  CHECK(r.solutions.front().n_nodes() == 129);
  CHECK(r.conditions.get("cor3").holds);
  CHECK(r.nonuniqueness_gap == doctest::Approx(std::pow(r.beta.sup_norm(), 2.5)));
  const SampledPath again = demo_regularization(c).solutions.back();
  CHECK(sup_distance(again, r.solutions.back()) == 0.0);

  c.eps_last = 3;
  CHECK_THROWS_AS(demo_regularization(c), std::invalid_argument);
}

TEST_CASE("scaling_study: row order and constant-free slopes") {
  ScalingConfig c;
  c.hursts = {0.7, 0.8};
  c.deltas = {0.5};
  c.alphas = {0.6, 1.5};
  c.n_steps = 64;
  c.n_samples = 100;
  c.n_scales = 4;
  c.space_cells = 16;
  const ScalingResult r = scaling_study(c);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].hurst == 0.7);
  CHECK(r.rows[1].alpha == 1.5);
  CHECK(r.rows[2].hurst == 0.8);
  for (const ScalingRow &row : r.rows) {
    CHECK(row.moments.scales.size() == 4);
    CHECK(std::isfinite(row.moments.slope));
    CHECK(row.holder.weighted > 0.0);
  }
  c.n_scales = 7;
  CHECK_THROWS_AS(scaling_study(c), std::invalid_argument);
}
