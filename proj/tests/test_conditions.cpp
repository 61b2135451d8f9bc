#include "yr/conditions.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace yr;

TEST_CASE("check_conditions: worked examples") {
  ConditionInput in;
  in.hurst = 0.75;
  in.delta = 0.1;
  in.alpha = 0.6;
  const ConditionReport r = check_conditions(in);
  CHECK(r.get("cor3").threshold == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(r.get("cor3").holds);
  CHECK(r.get("cor3").margin == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(r.nu == doctest::Approx(5.0 - 1e-3).epsilon(1e-15));
  CHECK(r.get("thm2").lhs == doctest::Approx(0.6 + 0.5 * (5.0 - 1e-3)).epsilon(1e-15));
  CHECK(r.gamma_low == doctest::Approx(0.75));

  ConditionInput side;
  side.hurst = 0.6;
  side.delta = 0.9;
  side.alpha = 0.5;
  const ConditionResult s = check_conditions(side).get("thm4_side");
  CHECK(s.lhs == doctest::Approx(1.05).epsilon(1e-15));
  CHECK(s.holds);

  ConditionInput flow = in;
  flow.n = 3;
  flow.nu = 4.0;
  const ConditionReport f = check_conditions(flow);
  CHECK(f.get("thm2_flow_n").threshold == 4.0);
  CHECK(f.get("thm2_flow_n").lhs == doctest::Approx(2.6));
  CHECK_FALSE(f.get("thm2_flow_n").holds);
  CHECK(f.get("cor3_flow_n").threshold == doctest::Approx(1.5));
  CHECK_THROWS_AS(f.get("nope"), std::out_of_range);
}

TEST_CASE("check_conditions: H -> 1 limits") {
  for (double d : {0.05, 0.1, 0.25, 0.4, 0.6, 0.9}) {
    const double h = 1.0 - 1e-9;
    CHECK(std::abs(cor3_threshold(h, d) - cor3_limit(d)) < 1e-6);
    CHECK(std::abs(cor5_threshold(h, d) - cor5_limit(d)) < 1e-6);
  }
  CHECK(cor3_limit(0.25) == 0.0);
  CHECK(cor5_limit(0.25) == 0.0);
  CHECK(cor5_limit(0.5) == 0.5);
}

TEST_CASE("check_conditions: properties") {
  for (double h = 0.55; h < 1.0; h += 0.05) {
    for (double d = 0.05; d < 1.0; d += 0.05) {
      // Monotone thresholds.
      CHECK(cor3_threshold(h + 0.01, d) < cor3_threshold(h, d));
      CHECK(cor3_threshold(h, d + 0.01) > cor3_threshold(h, d));
      for (double a : {-1.0, 0.2, 0.9, 1.7}) {
        ConditionInput in;
        in.hurst = h;
        in.delta = d;
        in.alpha = a;
        const ConditionReport r = check_conditions(in);
        CHECK(r.get("thm1").lhs == doctest::Approx(r.get("thm2").lhs).epsilon(1e-14));
        // A corollary margin larger than the ε loss carries over to the theorem.
        if (r.get("cor3").margin > in.epsilon * (2.0 * h - 1.0) + 1e-12) {
          CHECK(r.get("thm2").holds);
        }
        if (r.get("cor5").holds) {
          CHECK(r.get("thm4_side").holds);
        }
      }
    }
  }
}

TEST_CASE("check_conditions: domains") {
  ConditionInput in;
  in.hurst = 0.5;
  CHECK_THROWS_AS(check_conditions(in), std::invalid_argument);
  in.hurst = 0.7;
  in.delta = 1.0;
  CHECK_THROWS_AS(check_conditions(in), std::invalid_argument);
  in.delta = 0.4;
  in.n = 0;
  CHECK_THROWS_AS(check_conditions(in), std::invalid_argument);
  in.n = 1;
  in.nu = -1.0;
  CHECK_THROWS_AS(check_conditions(in), std::invalid_argument);
  in.nu.reset();
  in.epsilon = 2.0;
  CHECK_THROWS_AS(check_conditions(in), std::invalid_argument);
}
