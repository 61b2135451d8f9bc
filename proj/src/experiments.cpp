#include "yr/experiments.hpp"

#include "yr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace yr {

void NonuniquenessConfig::validate() const {
  if (!(hurst > 0.5 && hurst < 1.0)) {
    throw std::invalid_argument("demo-nonuniqueness: hurst must lie in (1/2, 1)");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("demo-nonuniqueness: alpha must lie in (0, 1)");
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("demo-nonuniqueness: horizon must be positive");
  }
  if (levels < 3 || levels > 20) {
    throw std::invalid_argument("demo-nonuniqueness: levels must be >= 3");
  }
  if (n_steps < (1 << levels) || n_steps % (1 << (levels - 1)) != 0) {
    throw std::invalid_argument("demo-nonuniqueness: n_steps must be a multiple of 2^(levels-1) and >= 2^levels");
  }
  if (space_cells < 2) {
    throw std::invalid_argument("demo-nonuniqueness: space_cells must be >= 2");
  }
  if (!(perturbation > 0.0)) {
    throw std::invalid_argument("demo-nonuniqueness: perturbation must be positive");
  }
}

SampledPath power_law_branch(const SampledPath &beta, double alpha) {
  const double p = 1.0 / (1.0 - alpha);
  return SampledPath(beta.grid, (beta.values.array().sign() * beta.values.array().abs().pow(p)).matrix());
}

NonuniquenessResult demo_nonuniqueness(const NonuniquenessConfig &cfg) {
  cfg.validate();
  const TimeGrid fine(cfg.horizon, cfg.n_steps);
  const FieldSpec b(PowerLaw{cfg.alpha, 1});
  NonuniquenessResult res;
  res.beta = gen_fbm({cfg.hurst, 1, derive_seed(cfg.seed, SeedLane::beta, 0)}, fine);
  res.zero = SampledPath::zero(fine, 1);
  res.branch = power_law_branch(res.beta, cfg.alpha);

  res.zero_residual_exact = true;
  res.min_separation = std::numeric_limits<double>::infinity();
  std::vector<double> decay;
  for (int l = cfg.levels - 1; l >= 0; --l) {
    const SampledPath beta = res.beta.subsampled(l);
    const SampledPath zero = SampledPath::zero(beta.grid, 1);
    const SampledPath branch = power_law_branch(beta, cfg.alpha);
    NonuniquenessLevel lv;
    lv.n_steps = beta.grid.n_steps;
    lv.residual_zero = residual_classical(b, zero, zero, beta);
    lv.residual_branch = residual_classical(b, branch, zero, beta);
    lv.distance = sup_distance(zero, branch);
    lv.branch_scale = std::pow(beta.sup_norm(), 1.0 / (1.0 - cfg.alpha));
    res.zero_residual_exact = res.zero_residual_exact && lv.residual_zero == 0.0;
    res.min_separation = std::min(res.min_separation, lv.branch_scale > 0.0 ? lv.distance / lv.branch_scale : 0.0);
    decay.push_back(lv.residual_branch);
    res.levels.push_back(lv);
  }
  if (std::all_of(decay.begin(), decay.end(), [](double r) { return r > 0.0; })) {
    res.branch_decay = fit_refinement_rate(Eigen::Map<const Eigen::VectorXd>(decay.data(), static_cast<Eigen::Index>(decay.size())));
  }

  // The solvers started at 0 stay on the zero branch; a perturbed restart leaves it.
  const double reach = std::max(1.0, 1.25 * res.branch.sup_norm());
  const SpaceGrid space(1, reach, cfg.space_cells);
  const AveragedField a = compute_Gamma(b, res.zero, res.beta, space, Interpolation::linear);
  const UniquenessProbe solvers =
      probe_uniqueness(a, Eigen::VectorXd::Zero(1), default_strategies(cfg.perturbation, cfg.seed));
  std::vector<Candidate> all = solvers.candidates;
  all.push_back({"closed_form_zero", res.zero, false});
  all.push_back({"closed_form_branch", res.branch, false});
  res.probe = probe_candidates(std::move(all), solvers.tol);
  for (const std::string &f : solvers.flags) {
    if (std::find(res.probe.flags.begin(), res.probe.flags.end(), f) == res.probe.flags.end()) {
      res.probe.flags.push_back(f);
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

void RegularizationConfig::validate() const {
  FbmSpec{hurst, 1, 0}.validate();
  FbmSpec{delta, 1, 0}.validate();
  if (!(hurst > 0.5)) {
    throw std::invalid_argument("demo-regularization: hurst must exceed 1/2");
  }
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("demo-regularization: alpha must be finite");
  }
  if (!(horizon > 0.0) || n_steps < 2 || space_cells < 2 || !(half_width > 0.0) || n_modes < 1) {
    throw std::invalid_argument("demo-regularization: grid parameters out of range");
  }
  if (eps_first < 0 || eps_last < eps_first + 2) {
    throw std::invalid_argument("demo-regularization: need at least three epsilons (eps_last >= eps_first + 2)");
  }
  if (!(perturbation > 0.0)) {
    throw std::invalid_argument("demo-regularization: perturbation must be positive");
  }
}

bool cauchy_monotone(const std::vector<double> &increments, int *inversions) {
  int inv = 0;
  bool ok = true;
  for (std::size_t k = 0; k + 1 < increments.size(); ++k) {
    if (increments[k + 1] >= increments[k]) {
      ++inv;
      ok = ok && increments[k + 1] <= 1.1 * increments[k];
    }
  }
  if (inversions != nullptr) {
    *inversions = inv;
  }
  return ok && inv <= 1;
}

RegularizationResult demo_regularization(const RegularizationConfig &cfg) {
  cfg.validate();
  ConditionInput ci;
  ci.hurst = cfg.hurst;
  ci.delta = cfg.delta;
  ci.alpha = cfg.alpha;
  const TimeGrid grid(cfg.horizon, cfg.n_steps);
  const SpaceGrid space(1, cfg.half_width, cfg.space_cells);
  RegularizationResult res;
  res.conditions = check_conditions(ci);
  res.field = FieldSpec(FourierSeries{cfg.n_modes, cfg.alpha, cfg.half_width, derive_seed(cfg.seed, SeedLane::field, 0), 1});
  res.w = gen_fbm({cfg.delta, 1, derive_seed(cfg.seed, SeedLane::path, 0)}, grid);
  res.beta = gen_fbm({cfg.hurst, 1, derive_seed(cfg.seed, SeedLane::beta, 0)}, grid);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, cfg.x0);
  for (int k = cfg.eps_first; k <= cfg.eps_last; ++k) {
    const double eps = std::ldexp(1.0, -k);
    const SdeSolution s = solve_sde(mollify(res.field, eps), res.w, res.beta, x0, {}, space);
    res.epsilons.push_back(eps);
    res.solutions.push_back(s.x);
    res.left_box += s.left_box ? 1 : 0;
  }
  for (std::size_t k = 0; k + 1 < res.solutions.size(); ++k) {
    res.increments.push_back(sup_distance(res.solutions[k], res.solutions[k + 1]));
  }
  res.monotone = cauchy_monotone(res.increments, &res.inversions);

  const AveragedField a = compute_Gamma(mollify(res.field, res.epsilons.back()), res.w, res.beta, space);
  res.probe = probe_uniqueness(a, x0 - res.w.at(0), default_strategies(cfg.perturbation, cfg.seed));
  res.nonuniqueness_gap = std::pow(res.beta.sup_norm(), 1.0 / (1.0 - std::clamp(cfg.alpha, 0.0, 0.99)));
  return res;
}

// ---------------------------------------------------------------------------

void ScalingConfig::validate() const {
  if (hursts.empty() || deltas.empty() || alphas.empty()) {
    throw std::invalid_argument("scaling-study: hursts, deltas and alphas must be non-empty");
  }
  for (double h : hursts) {
    if (!(h > 0.5 && h < 1.0)) {
      throw std::invalid_argument("scaling-study: every hurst must lie in (1/2, 1)");
    }
  }
  for (double d : deltas) {
    FbmSpec{d, 1, 0}.validate();
  }
  if (!(horizon > 0.0) || n_steps < 4 || space_cells < 2 || !(half_width > 0.0) || n_modes < 1) {
    throw std::invalid_argument("scaling-study: grid parameters out of range");
  }
  if (n_scales < 2 || (1 << n_scales) > n_steps) {
    throw std::invalid_argument("scaling-study: need 2 <= n_scales and 2^n_scales <= n_steps");
  }
}

ScalingResult scaling_study(const ScalingConfig &cfg) {
  cfg.validate();
  const TimeGrid grid(cfg.horizon, cfg.n_steps);
  const SpaceGrid space(1, cfg.half_width, cfg.space_cells);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, cfg.x);
  ScalingResult res;
  std::uint64_t r = 0;
  for (double h : cfg.hursts) {
    for (double d : cfg.deltas) {
      for (double a : cfg.alphas) {
        ScalingRow row;
        row.hurst = h;
        row.delta = d;
        row.alpha = a;
        FieldSpec b(FourierSeries{cfg.n_modes, a, cfg.half_width, derive_seed(cfg.seed, SeedLane::field, r), 1});
        if (a <= 0.0) {
          b = mollify(b, 0.1);
        }
        const SampledPath w = gen_fbm({d, 1, derive_seed(cfg.seed, SeedLane::path, r)}, grid);
        const FbmSpec fbm{h, 1, derive_seed(cfg.seed, SeedLane::beta, r)};
        row.moments = mc_moment_exponent(b, w, fbm, x, cfg.p, cfg.n_samples, cfg.n_scales);
        const SampledPath beta =
            FbmGenerator(h, grid).sample(derive_seed(fbm.seed, SeedLane::beta, static_cast<std::uint64_t>(cfg.n_samples)), 1);
        row.holder = estimate_field_holder(compute_Gamma(b, w, beta, space), 0.5, 0.5, 0.5);
        ConditionInput ci;
        ci.hurst = h;
        ci.delta = d;
        ci.alpha = a;
        row.cor3_margin = check_conditions(ci).get("cor3").margin;
        res.rows.push_back(std::move(row));
        ++r;
      }
    }
  }
  return res;
}

} // namespace yr
