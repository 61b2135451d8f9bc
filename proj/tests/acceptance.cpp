// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "yr/experiments.hpp"
#include "yr/parallel.hpp"
#include "yr/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace yr;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  bool pass = false;
  std::string summary;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome fbm_covariance_check() {
  const TimeGrid grid(1.0, 1 << 10);
  const int n = 10000;
  const std::vector<std::pair<int, int>> pairs = {{128, 128}, {256, 768}, {512, 512}, {100, 1000}, {1024, 1024}};
  bool ok = true;
  double worst = 0.0;
  for (double h : {0.55, 0.75, 0.9}) {
    const FbmGenerator gen(h, grid);
    std::vector<Eigen::VectorXd> draws(n);
    parallel_for(n, [&](std::size_t k) { draws[k] = gen.sample_scalar(derive_seed(1, SeedLane::path, k)); });
    for (const auto &[i, j] : pairs) {
      Eigen::VectorXd prod(n);
      for (int k = 0; k < n; ++k) {
        prod[k] = draws[k][i] * draws[k][j];
      }
      const double mean = prod.mean();
      const double se = std::sqrt((prod.array() - mean).square().sum() / (n - 1) / n);
      const double z = std::abs(mean - fbm_covariance(h, grid.node(i), grid.node(j))) / se;
      worst = std::max(worst, z);
      ok = ok && z <= 3.0;
    }
  }
  return {ok, "max |emp - exact| / SE = " + num(worst) + " over 15 (H, s, t) cells (limit 3)"};
}

Outcome averaging_identity() {
  const int levels = 4;
  const SampledPath fine = gen_fbm({0.3, 1, 0}, TimeGrid(1.0, 128 << levels));
  const FieldSpec b = make_bump(0.0, 0.5);
  std::vector<double> err;
  for (int l = 0; l <= levels; ++l) {
    const SampledPath w = fine.subsampled(levels - l);
    const SpaceGrid sg(1, 4.0, 64 << l);
    const AveragedField d = compute_T(b, w, sg);
    const AveragedField o = compute_T_via_occupation(b, compute_occupation(w, sg));
    err.push_back((d.values() - o.values()).lpNorm<Eigen::Infinity>());
  }
  bool halves = true;
  std::string ratios;
  for (std::size_t l = 1; l < err.size(); ++l) {
    const double r = err[l] / err[l - 1];
    halves = halves && r >= 0.35 && r <= 0.65;
    ratios += (l > 1 ? " " : "") + num(r);
  }
  const bool floor = err.back() < 1e-4;
  return {halves && floor, "halving ratios [" + ratios + "] (band 0.35..0.65), final " + num(err.back()) + " (floor 1e-4)"};
}

Outcome sewing_rate() {
  const double H = 0.75, delta = 0.6;
  const int coarse = 64, levels = 6;
  const TimeGrid fine(1.0, coarse << levels);
  double rate = 0.0;
  std::string per;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const SampledPath w = gen_fbm({delta, 1, derive_seed(seed, SeedLane::path, 0)}, fine);
    const SampledPath beta = gen_fbm({H, 1, derive_seed(seed, SeedLane::beta, 0)}, fine);
    const GammaRefinement r = gamma_refinement_study(make_bump(0.0, 1.0), w, beta, SpaceGrid(1, 2.0, 8), coarse, levels);
    rate += r.fit.slope / 3.0;
    per += (seed > 0 ? " " : "") + num(r.fit.slope);
  }
  const double need = H + delta - 1.0 - 0.15;
  return {rate >= need, "fitted order " + num(rate) + " (seeds " + per + ") >= " + num(need)};
}

Outcome moment_exponent() {
  const TimeGrid grid(1.0, 256);
  const SampledPath w = gen_fbm({0.5, 1, derive_seed(0, SeedLane::path, 0)}, grid);
  bool ok = true;
  std::string per;
  for (double h : {0.6, 0.75, 0.9}) {
    const MomentExponent m = mc_moment_exponent(make_bump(0.0, 2.0), w, {h, 1, derive_seed(0, SeedLane::beta, 0)},
                                                Eigen::VectorXd::Zero(1), 2.0, 2000, 6);
    ok = ok && std::abs(m.slope - h) <= 0.1;
    per += (per.empty() ? "" : ", ") + std::string("H=") + num(h) + ": " + num(m.slope);
  }
  return {ok, "slopes " + per + " (within H +- 0.1)"};
}

Outcome nonuniqueness() {
  const NonuniquenessResult r = demo_nonuniqueness({});
  const bool decays = r.zero_residual_exact && r.branch_decay.slope > 0.0;
  const double final_res = std::max(r.levels.back().residual_zero, r.levels.back().residual_branch);
  const bool ok = decays && final_res < 1e-2 && r.min_separation >= 0.5 && r.probe.verdict == Verdict::separate;
  return {ok, "x1 residual exactly 0, x2 rate " + num(r.branch_decay.slope) + ", final residual " + num(final_res) +
                  ", min distance / sup|beta|^2 " + num(r.min_separation) + ", verdict " + to_string(r.probe.verdict)};
}

Outcome regularization() {
  const RegularizationResult r = demo_regularization({});
  std::string inc;
  for (double d : r.increments) {
    inc += (inc.empty() ? "" : " ") + num(d);
  }
  const bool margin = r.conditions.get("cor3").margin > 0.0;
  const bool ok = margin && r.monotone && r.probe.verdict == Verdict::coincide;
  return {ok, "cor3 margin " + num(r.conditions.get("cor3").margin) + ", increments [" + inc + "], inversions " +
                  std::to_string(r.inversions) + ", verdict " + to_string(r.probe.verdict) + " over " +
                  std::to_string(r.probe.candidates.size()) + " candidates"};
}

Outcome comparison() {
  const FieldSpec b = mollify(FieldSpec(FourierSeries{32, 0.6, 4.0, derive_seed(0, SeedLane::field, 0), 1}), 1.0 / 32);
  const TimeGrid grid(1.0, 512);
  const SampledPath w = gen_fbm({0.1, 1, derive_seed(0, SeedLane::path, 0)}, grid);
  const SampledPath beta = gen_fbm({0.75, 1, derive_seed(0, SeedLane::beta, 0)}, grid);
  const AveragedField g = compute_Gamma(b, w, beta, SpaceGrid(1, 4.0, 256));
  std::vector<double> c;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const ComparisonReport r = compare_solutions(g, g, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, h), {});
    c.push_back(r.sup_distance / h);
  }
  const double spread = *std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end());
  return {spread < 2.0, "C(h) = " + num(c[0]) + " " + num(c[1]) + " " + num(c[2]) + ", max/min " + num(spread) + " (< 2)"};
}

Outcome flow_regularity() {
  ConditionInput ci;
  ci.hurst = 0.75;
  ci.delta = 0.1;
  ci.alpha = 2.5;
  const bool thm2 = check_conditions(ci).get("thm2").holds;
  const FieldSpec b(FourierSeries{32, 2.5, 4.0, derive_seed(0, SeedLane::field, 0), 1});
  const TimeGrid fine(1.0, 1024);
  const SampledPath w = gen_fbm({0.1, 1, derive_seed(0, SeedLane::path, 0)}, fine);
  const SampledPath beta = gen_fbm({0.75, 1, derive_seed(0, SeedLane::beta, 0)}, fine);
  const SpaceGrid space(1, 4.0, 256);
  Eigen::MatrixXd ic(17, 1), ic2(33, 1);
  ic.col(0) = Eigen::VectorXd::LinSpaced(17, -1.0, 1.0);
  ic2.col(0) = Eigen::VectorXd::LinSpaced(33, -1.0, 1.0);
  const double l1 = flow_lipschitz(solve_flow(compute_Gamma(b, w.subsampled(1), beta.subsampled(1), space), ic, {}));
  const double l2 = flow_lipschitz(solve_flow(compute_Gamma(b, w, beta, space), ic2, {}));
  const double change = std::abs(l2 / l1 - 1.0);
  return {thm2 && change < 0.1, std::string("thm2 ") + (thm2 ? "holds" : "fails") + ", Lipschitz " + num(l1) + " -> " +
                                    num(l2) + ", change " + num(100.0 * change) + "% (< 10%)"};
}

Outcome condition_calculator() {
  double worst = 0.0;
  for (double d : {0.05, 0.1, 0.2, 0.25, 0.4, 0.5, 0.6, 0.9}) {
    worst = std::max(worst, std::abs(cor3_threshold(1.0 - 1e-9, d) - (2.0 - 1.0 / (2.0 * d))));
  }
  ConditionInput a;
  a.hurst = 0.75;
  a.delta = 0.1;
  a.alpha = 0.6;
  const double t3 = check_conditions(a).get("cor3").threshold;
  ConditionInput s;
  s.hurst = 0.6;
  s.delta = 0.9;
  s.alpha = 0.5;
  const ConditionResult side = check_conditions(s).get("thm4_side");
  const bool exact = t3 == -0.5 && side.holds && std::abs(side.lhs - 1.05) <= 1e-15;
  return {worst < 1e-6 && exact, "max |cor3(H -> 1) - (2 - 1/(2 delta))| = " + num(worst) + ", cor3 threshold at (0.75, 0.1) = " +
                                     num(t3) + ", side condition H + alpha delta = " + num(side.lhs) +
                                     (side.holds ? " passes" : " fails")};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism(const std::string &cli) {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"fbm", "--param n_steps=512 --param hurst=0.7"},
      {"average", "--param n_steps=128 --param n_cells=32"},
      {"gamma", "--param n_steps=128 --param n_cells=32"},
      {"solve", "--param n_steps=128 --param n_cells=64"},
      {"flow", "--param n_steps=128 --param n_cells=64 --param ic_points=9"},
      {"check-conditions", "--param hurst=0.8 --param delta=0.2 --param alpha=0.3"},
      {"demo-nonuniqueness", "--param n_steps=1024 --param space_cells=512"},
      {"demo-regularization", "--param n_steps=128 --param space_cells=64 --param eps_last=5"},
      {"scaling-study", "--param n_samples=200 --param n_steps=64 --param n_scales=4 --param space_cells=32"},
  };
  const fs::path root = fs::temp_directory_path() / ("yr_acceptance_" + std::to_string(::getpid()));
  unsetenv("YR_DETERMINISTIC");
  int csvs = 0;
  std::string bad;
  for (const auto &[cmd, args] : runs) {
    std::vector<fs::path> outs;
    for (const char *threads : {"1", "1", "8"}) {
      const fs::path out = root / (cmd + "_" + std::to_string(outs.size()));
      const std::string line = cli + " " + cmd + " --seed 7 --threads " + threads + " --out " + out.string() + " " + args +
                               " > /dev/null 2>&1";
      const int rc = std::system(line.c_str());
      if (rc == -1 || !WIFEXITED(rc) || WEXITSTATUS(rc) == 1) {
        bad += " " + cmd + "(crashed)";
      }
      outs.push_back(out);
    }
    bool any = false;
    if (!fs::is_directory(outs[0])) {
      continue;
    }
    for (const auto &e : fs::directory_iterator(outs[0])) {
      if (e.path().extension() != ".csv") {
        continue;
      }
      any = true;
      ++csvs;
      const std::string ref = slurp(e.path());
      for (std::size_t k = 1; k < outs.size(); ++k) {
        if (!fs::exists(outs[k] / e.path().filename()) || slurp(outs[k] / e.path().filename()) != ref) {
          bad += " " + cmd + "/" + e.path().filename().string();
        }
      }
    }
    if (!any) {
      bad += " " + cmd + "(no csv)";
    }
  }
  fs::remove_all(root);
  return {bad.empty(), std::to_string(csvs) + " CSVs across 9 subcommands identical over 2 runs at 1 thread and 1 at 8" +
                           (bad.empty() ? "" : "; mismatches:" + bad)};
}

} // namespace

int main(int argc, char **argv) {
  const std::string cli = argc > 1 ? argv[1] : YR_CLI_PATH;
  struct Criterion
  {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "fBm covariance", 30.0, fbm_covariance_check},
      {2, "averaging identity T vs occupation", 10.0, averaging_identity},
      {3, "sewing rate of Gamma", 20.0, sewing_rate},
      {4, "moment exponent", 120.0, moment_exponent},
      {5, "non-uniqueness demo", 30.0, nonuniqueness},
      {6, "regularization demo", 300.0, regularization},
      {7, "comparison stability", 60.0, comparison},
      {8, "flow regularity", 120.0, flow_regularity},
      {9, "condition calculator", 1.0, condition_calculator},
      {10, "determinism across threads", 300.0, [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (const Criterion &c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.summary << "; " << num(secs)
              << " s (budget " << num(c.budget_s) << " s" << (in_time ? "" : ", exceeded") << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass" << std::endl;
  return failed == 0 ? 0 : 1;
}
