#include "yr/parallel.hpp"
#include "yr/paths.hpp"
#include "yr/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

using namespace yr;

namespace {

// Reference covariance, written out independently of the library.
double covariance_oracle(double h, double s, double t) {
  return 0.5 * (std::pow(s, 2 * h) + std::pow(t, 2 * h) - std::pow(std::abs(t - s), 2 * h));
}

struct MomentCheck
{
  double mean;
  double stderr_;
};

MomentCheck mean_with_error(const std::vector<double> &v) {
  double m = 0.0;
  for (double x : v) {
    m += x;
  }
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) {
    var += (x - m) * (x - m);
  }
  var /= static_cast<double>(v.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

} // namespace

TEST_CASE("TimeGrid validates and exposes nodes") {
  const TimeGrid g(2.0, 4);
  CHECK(g.dt() == doctest::Approx(0.5));
  CHECK(g.node(4) == 2.0);
  CHECK(g.refined(2).n_steps == 16);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
}

TEST_CASE("SampledPath rejects non-finite and mis-sized values") {
  const TimeGrid g(1.0, 2);
  CHECK_THROWS_AS(SampledPath(g, Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 1);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(SampledPath(g, bad), std::invalid_argument);
}

TEST_CASE("add_paths / sub_paths") {
  const TimeGrid g(1.0, 64);
  const SampledPath w = gen_fbm({0.6, 2, 7}, g);
  const SampledPath theta = gen_fbm({0.8, 2, 8}, g);

  CHECK(sub_paths(w, w).values.isZero(0.0));
  CHECK(add_paths(w, SampledPath::zero(g, 2)).values == w.values);

  const SampledPath round = sub_paths(add_paths(theta, w), w);
  const double eps = std::numeric_limits<double>::epsilon();
  const Eigen::ArrayXXd bound = eps * (theta.values.array().abs() + w.values.array().abs());
  CHECK(((round.values - theta.values).array().abs() <= bound).all());

  CHECK_THROWS_AS(add_paths(w, SampledPath::zero(g, 1)), std::invalid_argument);
  CHECK_THROWS_AS(sub_paths(w, SampledPath::zero(TimeGrid(1.0, 32), 2)), std::invalid_argument);
}

TEST_CASE("gen_fbm basics") {
  const TimeGrid g(1.0, 256);

  SUBCASE("starts at zero, deterministic, coordinates reproducible in isolation") {
    const SampledPath a = gen_fbm({0.7, 3, 42}, g);
    const SampledPath b = gen_fbm({0.7, 3, 42}, g);
    CHECK(a.values == b.values);
    CHECK(a.values.row(0).isZero(0.0));
    const FbmGenerator gen(0.7, g);
    CHECK(gen.sample_scalar(derive_seed(42, SeedLane::path, 2)) == a.values.col(2));
  }

  SUBCASE("thread count does not change the draw") {
    set_num_threads(1);
    const SampledPath a = gen_fbm({0.7, 2, 9}, g);
    set_num_threads(8);
    const SampledPath b = gen_fbm({0.7, 2, 9}, g);
    set_num_threads(1);
    CHECK(a.values == b.values);
  }

  SUBCASE("degenerate hurst uses beta_t = N t") {
    const FbmDraw d = gen_fbm_traced({0.9995, 1, 5}, g);
    CHECK(d.method == FbmMethod::linear);
    const double slope = d.path.values(g.n_steps, 0);
    for (int i = 0; i <= g.n_steps; ++i) {
      CHECK(d.path.values(i, 0) == doctest::Approx(slope * g.node(i)).epsilon(1e-14));
    }
  }

  SUBCASE("circulant embedding is the default fast path") {
    CHECK(gen_fbm_traced({0.75, 1, 1}, g).method == FbmMethod::circulant);
    CHECK(gen_fbm_traced({0.75, 1, 1}, g, FbmMethod::cholesky).method == FbmMethod::cholesky);
  }

  SUBCASE("invalid hurst") {
    CHECK_THROWS_AS(gen_fbm({1.0, 1, 0}, g), std::invalid_argument);
    CHECK_THROWS_AS(gen_fbm({0.0, 1, 0}, g), std::invalid_argument);
  }
}

TEST_CASE("Brownian case: independent increments with variance dt") {
  const TimeGrid g(1.0, 64);
  const FbmGenerator gen(0.5, g);
  std::vector<double> sq, cross;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const Eigen::VectorXd p = gen.sample_scalar(derive_seed(11, SeedLane::path, s));
    const double d1 = p[11] - p[10];
    const double d2 = p[31] - p[30];
    sq.push_back(d1 * d1);
    cross.push_back(d1 * d2);
  }
  const auto v = mean_with_error(sq);
  const auto c = mean_with_error(cross);
  CHECK(std::abs(v.mean - g.dt()) < 3.0 * v.stderr_);
  CHECK(std::abs(c.mean) < 3.0 * c.stderr_);
}

TEST_CASE("H = 0.75 covariance at (0.25, 1) over 1e4 samples") {
  const TimeGrid g(1.0, 256);
  const double expected = covariance_oracle(0.75, 0.25, 1.0);
  CHECK(expected == doctest::Approx(0.2377).epsilon(1e-3));
  for (FbmMethod method : {FbmMethod::circulant, FbmMethod::cholesky}) {
    const FbmGenerator gen(0.75, g, method);
    std::vector<double> prod, sq;
    for (std::uint64_t s = 0; s < 10000; ++s) {
      const Eigen::VectorXd p = gen.sample_scalar(derive_seed(3, SeedLane::path, s));
      prod.push_back(p[64] * p[256]);
      sq.push_back(p[256] * p[256]);
    }
    const auto c = mean_with_error(prod);
    const auto v = mean_with_error(sq);
    CHECK(std::abs(c.mean - expected) < 3.0 * c.stderr_);
    CHECK(std::abs(v.mean - 1.0) < 3.0 * v.stderr_);
  }
}

TEST_CASE("self-similarity: c^{-H} beta_{c t} and beta_t agree in law (KS, 1%)") {
  const double h = 0.7, c = 4.0;
  const FbmGenerator unit(h, TimeGrid(1.0, 128));
  const FbmGenerator scaled(h, TimeGrid(c, 128));
  std::vector<double> a, b;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const Eigen::VectorXd p = unit.sample_scalar(derive_seed(1, SeedLane::path, s));
    const Eigen::VectorXd q = scaled.sample_scalar(derive_seed(2, SeedLane::path, s));
    a.push_back(p[64] - p[32]);
    b.push_back((q[64] - q[32]) / std::pow(c, h));
  }
  const double crit = 1.628 * std::sqrt(2.0 / 10000.0);
  CHECK(ks_statistic(a, b) < crit);
}

TEST_CASE("holder_seminorm") {
  const TimeGrid g(1.0, 128);

  SUBCASE("linear path, exponent 1 gives |c|") {
    const SampledPath p(g, -2.5 * g.nodes());
    CHECK(holder_seminorm(p, 1.0).seminorm == doctest::Approx(2.5));
    CHECK(holder_seminorm(p, 1.0, PairStrategy::all).seminorm == doctest::Approx(2.5));
  }

  SUBCASE("constant path gives 0") {
    const SampledPath p(g, Eigen::MatrixXd::Constant(g.n_nodes(), 2, 3.0));
    CHECK(holder_seminorm(p, 0.5).seminorm == 0.0);
  }

  SUBCASE("dyadic <= window <= all on the same path") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SampledPath p = gen_fbm({0.6, 2, seed}, g);
      const double dy = holder_seminorm(p, 0.5, PairStrategy::dyadic).seminorm;
      const double all = holder_seminorm(p, 0.5, PairStrategy::all).seminorm;
      const double win = holder_seminorm(p, 0.5, PairStrategy::window, 4).seminorm;
      CHECK(dy <= all);
      CHECK(win <= all);
    }
  }

  SUBCASE("exponent outside (0,1]") {
    const SampledPath p = SampledPath::zero(g, 1);
    CHECK_THROWS_AS(holder_seminorm(p, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(holder_seminorm(p, 1.5), std::invalid_argument);
  }
}

TEST_CASE("holder_seminorm refinement: blows up above H, stabilizes below") {
  // One fine path per seed; coarser levels are restrictions of it.
  const double h = 0.6;
  const int levels = 5;
  double growth_above = 0.0, growth_below = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const SampledPath fine = gen_fbm({h, 1, seed}, TimeGrid(1.0, 256 << levels));
    const double above0 = holder_seminorm(fine.subsampled(levels), h + 0.1).seminorm;
    const double above1 = holder_seminorm(fine, h + 0.1).seminorm;
    const double below0 = holder_seminorm(fine.subsampled(levels), h - 0.1).seminorm;
    const double below1 = holder_seminorm(fine, h - 0.1).seminorm;
    growth_above += std::log2(above1 / above0) / 4.0;
    growth_below += std::log2(below1 / below0) / 4.0;
  }
  // 32x refinement: the supremum over scales gains ~0.1 per dyadic level above H.
  CHECK(growth_above > 0.3);
  CHECK(growth_below < 0.25);
}

TEST_CASE("path CSV round-trips bit-exactly") {
  const SampledPath p = gen_fbm({0.65, 2, 77}, TimeGrid(1.5, 33));
  std::stringstream ss;
  write_path_csv(ss, p);
  CHECK(ss.str().rfind("t,x_1,x_2\n", 0) == 0);
  const SampledPath q = read_path_csv(ss);
  CHECK(q.grid.n_steps == 33);
  CHECK(q.values == p.values);
}
