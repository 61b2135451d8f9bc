#include "yr/young.hpp"

#include <doctest.h>

#include <cmath>

using namespace yr;

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

AveragedField t_sin(const TimeGrid &tg, const SpaceGrid &sg) {
  return tabulate_field(tg, sg, 1, [](double t, const Eigen::VectorXd &x) { return scalar(t * std::sin(x[0])); });
}

} // namespace

TEST_CASE("young_integral: space-independent driver telescopes") {
  const TimeGrid tg(2.0, 32);
  const SpaceGrid sg(1, 3.0, 16);
  const auto g = [](double t) { return std::sin(3.0 * t) + t * t; };
  const AveragedField a =
      tabulate_field(tg, sg, 1, [&](double t, const Eigen::VectorXd &) { return scalar(g(t)); });
  const SampledPath theta = gen_fbm({0.7, 1, 3}, tg.refined(2));
  const YoungIntegralResult r = young_integral(a, theta, 2);
  for (int i = 0; i <= tg.n_steps; ++i) {
    CHECK(r.path.values(4 * i, 0) == doctest::Approx(g(tg.node(i)) - g(0.0)).epsilon(1e-13));
  }
  const RefinementStudy st = refinement_study(a, theta, 2);
  for (double d : st.deltas) {
    CHECK(d <= 1e-13);
  }
}

TEST_CASE("young_integral: A = t f(x) reduces to the time integral of f along theta") {
  const SpaceGrid sg(1, 4.0, 400);
  std::vector<double> errs;
  for (int n : {64, 128, 256}) {
    const TimeGrid tg(1.0, n);
    const SampledPath theta(tg, (2.0 * tg.nodes().array()).cos().matrix());
    const YoungIntegralResult r = young_integral(t_sin(tg, sg), theta, 0);
    // Reference: fine trapezoid of sin(cos 2u).
    double ref = 0.0;
    const int m = 1 << 16;
    for (int k = 0; k < m; ++k) {
      const double u0 = static_cast<double>(k) / m, u1 = static_cast<double>(k + 1) / m;
      ref += 0.5 / m * (std::sin(std::cos(2.0 * u0)) + std::sin(std::cos(2.0 * u1)));
    }
    errs.push_back(std::abs(r.path.values(n, 0) - ref));
  }
  MESSAGE("errors " << errs[0] << " " << errs[1] << " " << errs[2]);
  CHECK(errs[1] / errs[0] == doctest::Approx(0.5).epsilon(0.2));
  CHECK(errs[2] / errs[1] == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("young_integral: germ residual decays like |t-s|^{gamma + eta nu}") {
  // θ_t = t^ν is exactly ν-Hölder (at t = 0); A = t sin x has γ = η = 1.
  const TimeGrid tg(1.0, 64);
  const SpaceGrid sg(1, 4.0, 256);
  const AveragedField a = t_sin(tg, sg);
  const TimeGrid fine = tg.refined(6);
  for (double nu : {0.4, 0.6, 0.8}) {
    const SampledPath theta(fine, fine.nodes().array().pow(nu).matrix());
    const YoungIntegralResult r = young_integral(a, theta, 6, 1.0 + nu);
    MESSAGE("nu " << nu << " germ exponent " << r.germ_decay.slope);
    CHECK(r.germ_decay.slope >= 1.0 + nu - 0.15);
    CHECK(std::isfinite(r.germ_residual));
    CHECK_FALSE(r.left_box);
  }
}

TEST_CASE("refinement_study rates") {
  const TimeGrid tg(1.0, 32);
  const SpaceGrid sg(1, 4.0, 256);
  const AveragedField a = t_sin(tg, sg);
  const int levels = 7;
  const TimeGrid fine = tg.refined(levels);

  SUBCASE("smooth driver, smooth theta: first order") {
    const SampledPath theta(fine, (3.0 * fine.nodes().array()).sin().matrix());
    CHECK(refinement_study(a, theta, levels).fit.slope >= 0.95);
  }
  SUBCASE("gamma = eta = 1, nu = H") {
    for (double H : {0.6, 0.8}) {
      const SampledPath theta = gen_fbm({H, 1, 11}, fine);
      const RefinementStudy st = refinement_study(a, theta, levels);
      MESSAGE("H " << H << " rate " << st.fit.slope);
      CHECK(std::abs(st.fit.slope - expected_refinement_rate(1.0, 1.0, H)) <= 0.2);
    }
  }
  SUBCASE("levels < 2 is refused") {
    CHECK_THROWS_AS(refinement_study(a, SampledPath::zero(fine, 1), 1), std::invalid_argument);
  }
}

TEST_CASE("young_integral: additivity, linearity, continuity in theta") {
  const TimeGrid tg(1.0, 128);
  const SpaceGrid sg(1, 4.0, 128);
  const SampledPath w = gen_fbm({0.6, 1, 1}, tg);
  const SampledPath beta = gen_fbm({0.75, 1, 2}, tg);
  const AveragedField g1 = compute_Gamma(make_bump(0.3, 0.8), w, beta, sg);
  const AveragedField g2 = compute_Gamma(FieldSpec(FourierSeries{8, 1.0, 4.0, 5, 1}), w, beta, sg);
  const SampledPath theta = gen_fbm({0.75, 1, 3}, tg);

  const YoungIntegralResult r = young_integral(g1, theta, 0);
  Eigen::VectorXd direct = Eigen::VectorXd::Zero(1);
  for (int k = 40; k < 100; ++k) {
    direct += g1.increment(k, k + 1, theta.at(k));
  }
  CHECK(r.path.increment(40, 100)[0] == doctest::Approx(direct[0]).epsilon(1e-12));

  const SampledPath sum = young_integral(g1 + g2, theta, 0).path;
  const SampledPath parts = add_paths(r.path, young_integral(g2, theta, 0).path);
  CHECK(sup_distance(sum, parts) <= 1e-12);

  std::vector<double> ratios;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    SampledPath shifted = theta;
    shifted.values.array() += h;
    ratios.push_back(sup_distance(young_integral(g1, shifted, 0).path, r.path) / h);
  }
  CHECK(ratios[1] == doctest::Approx(ratios[0]).epsilon(0.2));
  CHECK(ratios[2] == doctest::Approx(ratios[1]).epsilon(0.2));

  CHECK_THROWS_AS(young_integral(g1, gen_fbm({0.7, 1, 0}, TimeGrid(1.0, 100)), 0), std::invalid_argument);
  CHECK_THROWS_AS(young_integral(g1, theta, 1), std::invalid_argument);
}
