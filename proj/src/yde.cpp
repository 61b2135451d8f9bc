#include "yr/yde.hpp"

#include "yr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace yr {

const char *to_string(Scheme s) { return s == Scheme::euler ? "euler" : "picard"; }

Scheme scheme_from_string(const std::string &s) {
  if (s == "euler") {
    return Scheme::euler;
  }
  if (s == "picard") {
    return Scheme::picard;
  }
  throw std::invalid_argument("unknown scheme '" + s + "' (expected euler or picard)");
}

void SolveConfig::validate() const {
  if (picard_max_iter < 1) {
    throw std::invalid_argument("SolveConfig: picard_max_iter must be >= 1");
  }
  if (!(picard_tol > 0.0)) {
    throw std::invalid_argument("SolveConfig: picard_tol must be positive");
  }
  if (substeps < 1) {
    throw std::invalid_argument("SolveConfig: substeps must be >= 1");
  }
}

PicardDivergence::PicardDivergence(SampledPath last, double residual_, int iterations_)
    : std::runtime_error("picard iteration did not converge after " + std::to_string(iterations_) +
                         " sweeps (residual " + format_double(residual_) + ")"),
      last_iterate(std::move(last)), residual(residual_), iterations(iterations_) {}

namespace {

// Driver increments on A's grid split into `substeps` equal pieces.
struct SubstepDriver
{
  const AveragedField &a;
  int substeps;
  TimeGrid fine;

  SubstepDriver(const AveragedField &a_, int s)
      : a(a_), substeps(s), fine(a_.time_grid().horizon, a_.time_grid().n_steps * s) {}

  Eigen::VectorXd inc(int k, const Eigen::Ref<const Eigen::VectorXd> &x) const {
    if (substeps == 1) {
      return a.increment(k, k + 1, x);
    }
    return a.increment_at(fine.node(k), fine.node(k + 1), x);
  }

  SampledPath coarse(const Eigen::MatrixXd &v) const {
    const TimeGrid &g = a.time_grid();
    Eigen::MatrixXd out(g.n_nodes(), v.cols());
    for (int i = 0; i <= g.n_steps; ++i) {
      out.row(i) = v.row(static_cast<Eigen::Index>(i) * substeps);
    }
    return SampledPath(g, std::move(out));
  }

  double residual(const Eigen::MatrixXd &v) const {
    Eigen::VectorXd acc = v.row(0).transpose();
    double r = 0.0;
    for (int k = 0; k < fine.n_steps; ++k) {
      acc += inc(k, v.row(k).transpose());
      r = std::max(r, (v.row(k + 1).transpose() - acc).norm());
    }
    return r;
  }
};

} // namespace

YdeSolution solve_yde(const AveragedField &a, const Eigen::Ref<const Eigen::VectorXd> &theta0, const SolveConfig &cfg,
                      const SampledPath *initial_guess) {
  cfg.validate();
  const int d = a.space_grid().dim;
  if (theta0.size() != d || a.out_dim() != d) {
    throw std::invalid_argument("solve_yde: theta0, A's space grid and A's output must share the dimension");
  }
  if (!theta0.allFinite()) {
    throw std::invalid_argument("solve_yde: theta0 must be finite");
  }
  const SubstepDriver drv(a, cfg.substeps);
  const int n = drv.fine.n_steps;
  Eigen::MatrixXd v(n + 1, d);
  YdeSolution sol;

  if (cfg.scheme == Scheme::euler) {
    v.row(0) = theta0.transpose();
    for (int k = 0; k < n; ++k) {
      const Eigen::VectorXd x = v.row(k).transpose();
      sol.left_box = sol.left_box || !a.contains(x);
      v.row(k + 1) = (x + drv.inc(k, x)).transpose();
    }
    sol.iterations = 1;
  } else {
    if (initial_guess != nullptr) {
      if (!(initial_guess->grid == a.time_grid()) || initial_guess->dim() != d) {
        throw std::invalid_argument("solve_yde: initial guess must live on A's grid");
      }
      for (int k = 0; k <= n; ++k) {
        const int i = std::min(k / cfg.substeps, a.time_grid().n_steps - 1);
        const double lam = static_cast<double>(k - i * cfg.substeps) / cfg.substeps;
        v.row(k) = (1.0 - lam) * initial_guess->values.row(i) + lam * initial_guess->values.row(i + 1);
      }
      v.row(0) = theta0.transpose();
    } else {
      v = theta0.transpose().replicate(n + 1, 1);
    }
    Eigen::MatrixXd next(n + 1, d);
    double change = 0.0;
    int it = 0;
    while (true) {
      ++it;
      next.row(0) = theta0.transpose();
      for (int k = 0; k < n; ++k) {
        next.row(k + 1) = next.row(k) + drv.inc(k, v.row(k).transpose()).transpose();
      }
      change = (next - v).rowwise().norm().maxCoeff();
      v.swap(next);
      if (change < cfg.picard_tol) {
        break;
      }
      if (it >= cfg.picard_max_iter || !v.allFinite()) {
        const double res = v.allFinite() ? drv.residual(v) : std::numeric_limits<double>::infinity();
        throw PicardDivergence(v.allFinite() ? drv.coarse(v) : SampledPath::zero(a.time_grid(), d), res, it);
      }
    }
    sol.iterations = it;
    for (int k = 0; k <= n; ++k) {
      sol.left_box = sol.left_box || !a.contains(v.row(k).transpose());
    }
  }
  if (!v.allFinite()) {
    throw std::runtime_error("solve_yde: solution became non-finite");
  }
  sol.residual = drv.residual(v);
  sol.theta = drv.coarse(v);
  return sol;
}

// ---------------------------------------------------------------------------

SdeSolution solve_sde(const FieldSpec &b, const SampledPath &w, const SampledPath &beta,
                      const Eigen::Ref<const Eigen::VectorXd> &x0, const SolveConfig &cfg, const SpaceGrid &space,
                      const FieldSpec *drift) {
  if (x0.size() != w.dim()) {
    throw std::invalid_argument("solve_sde: x0 and w have different dimensions");
  }
  AveragedField a = compute_Gamma(b, w, beta, space);
  if (drift != nullptr) {
    a = combine_drift_diffusion(compute_T(*drift, w, space), a);
  }
  const Eigen::VectorXd theta0 = x0 - w.at(0);
  const YdeSolution sol = solve_yde(a, theta0, cfg);
  SdeSolution out;
  out.theta = sol.theta;
  out.x = add_paths(sol.theta, w);
  out.residual = sol.residual;
  out.left_box = sol.left_box;
  return out;
}

SampledPath solve_classical_young_sde(const FieldSpec &b, const SampledPath &w, const SampledPath &beta,
                                      const Eigen::Ref<const Eigen::VectorXd> &x0) {
  if (!(w.grid == beta.grid)) {
    throw std::invalid_argument("solve_classical_young_sde: w and beta live on different grids");
  }
  if (x0.size() != w.dim() || b.dim() != w.dim() || b.noise_dim() != beta.dim()) {
    throw std::invalid_argument("solve_classical_young_sde: dimension mismatch");
  }
  const int n = w.grid.n_steps;
  Eigen::MatrixXd v(n + 1, w.dim());
  v.row(0) = x0.transpose();
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd x = v.row(k).transpose();
    v.row(k + 1) = (x + eval_field(b, x) * beta.increment(k, k + 1) + w.increment(k, k + 1)).transpose();
  }
  return SampledPath(w.grid, std::move(v));
}

// ---------------------------------------------------------------------------

FlowMap solve_flow(const AveragedField &a, const Eigen::MatrixXd &initial, const SolveConfig &cfg) {
  const int d = a.space_grid().dim;
  if (initial.cols() != d || initial.rows() < 1) {
    throw std::invalid_argument("solve_flow: initial conditions must be rows of dimension d");
  }
  const auto n_ic = static_cast<std::size_t>(initial.rows());
  FlowMap flow;
  flow.initial = initial;
  flow.paths.resize(n_ic);
  std::vector<char> left(n_ic, 0);
  parallel_for(n_ic, [&](std::size_t i) {
    const YdeSolution s = solve_yde(a, initial.row(static_cast<Eigen::Index>(i)).transpose(), cfg);
    flow.paths[i] = s.theta;
    left[i] = s.left_box ? 1 : 0;
  });
  flow.left_box = std::any_of(left.begin(), left.end(), [](char c) { return c != 0; });

  if (d == 1 && n_ic >= 2) {
    for (std::size_t i = 1; i < n_ic; ++i) {
      if (!(initial(static_cast<Eigen::Index>(i), 0) > initial(static_cast<Eigen::Index>(i - 1), 0))) {
        return flow; // finite differences need a strictly increasing grid
      }
    }
    for (std::size_t i = 0; i < n_ic; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == n_ic ? i : i + 1;
      const double h = initial(static_cast<Eigen::Index>(hi), 0) - initial(static_cast<Eigen::Index>(lo), 0);
      flow.derivative.push_back((flow.paths[hi].values - flow.paths[lo].values) / h);
    }
  }
  return flow;
}

double flow_lipschitz(const FlowMap &flow) {
  const auto n = static_cast<std::size_t>(flow.initial.rows());
  double lip = 0.0;
  auto visit = [&](std::size_t i, std::size_t j) {
    const double h = (flow.initial.row(static_cast<Eigen::Index>(i)) - flow.initial.row(static_cast<Eigen::Index>(j))).norm();
    if (h > 0.0) {
      lip = std::max(lip, (flow.paths[i].values - flow.paths[j].values).rowwise().norm().maxCoeff() / h);
    }
  };
  if (flow.initial.cols() == 1) {
    for (std::size_t i = 1; i < n; ++i) {
      visit(i - 1, i);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        visit(i, j);
      }
    }
  }
  return lip;
}

void write_flow_csv(std::ostream &os, const FlowMap &flow) {
  const Eigen::Index d = flow.initial.cols();
  for (Eigen::Index k = 0; k < d; ++k) {
    os << "theta0_" << k + 1 << ',';
  }
  os << 't';
  for (Eigen::Index k = 0; k < d; ++k) {
    os << ",x_" << k + 1;
  }
  os << '\n';
  for (std::size_t i = 0; i < flow.paths.size(); ++i) {
    const SampledPath &p = flow.paths[i];
    for (int r = 0; r < p.n_nodes(); ++r) {
      for (Eigen::Index k = 0; k < d; ++k) {
        os << format_double(flow.initial(static_cast<Eigen::Index>(i), k)) << ',';
      }
      os << format_double(p.grid.node(r));
      for (Eigen::Index k = 0; k < d; ++k) {
        os << ',' << format_double(p.values(r, k));
      }
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------

ComparisonReport compare_solutions(const AveragedField &a1, const AveragedField &a2,
                                   const Eigen::Ref<const Eigen::VectorXd> &theta0_1,
                                   const Eigen::Ref<const Eigen::VectorXd> &theta0_2, const SolveConfig &cfg,
                                   double gamma, double lambda) {
  const YdeSolution s1 = solve_yde(a1, theta0_1, cfg);
  const YdeSolution s2 = solve_yde(a2, theta0_2, cfg);
  ComparisonReport rep;
  const SampledPath diff = sub_paths(s1.theta, s2.theta);
  rep.sup_distance = diff.values.rowwise().norm().maxCoeff();
  rep.holder_distance = holder_seminorm(diff, gamma).seminorm;
  rep.initial_distance = (theta0_1 - theta0_2).norm();
  rep.driver_distance = estimate_field_holder(a1 - a2, gamma, 1.0, lambda).weighted;
  const double denom = rep.initial_distance + rep.driver_distance;
  rep.ratio = denom > 0.0 ? (rep.sup_distance + rep.holder_distance) / denom : 0.0;
  rep.left_box = s1.left_box || s2.left_box;
  return rep;
}

// ---------------------------------------------------------------------------

const char *to_string(Verdict v) {
  switch (v) {
  case Verdict::coincide:
    return "coincide";
  case Verdict::separate:
    return "separate";
  case Verdict::inconclusive:
    return "inconclusive";
  }
  return "unknown";
}

std::vector<Strategy> default_strategies(double perturbation, std::uint64_t seed) {
  return {
      {"euler_s1", Scheme::euler, 1, 0.0, seed},
      {"euler_s2", Scheme::euler, 2, 0.0, seed},
      {"picard_s1", Scheme::picard, 1, 0.0, seed},
      {"picard_s2", Scheme::picard, 2, 0.0, seed},
      {"euler_s1_restart", Scheme::euler, 1, perturbation, seed},
  };
}

UniquenessProbe probe_candidates(std::vector<Candidate> candidates, double tol) {
  if (candidates.size() < 2) {
    throw std::invalid_argument("probe_candidates: need at least two candidates");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("probe_candidates: tol must be positive");
  }
  UniquenessProbe p;
  p.tol = tol;
  const auto n = static_cast<Eigen::Index>(candidates.size());
  p.pairwise = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = sup_distance(candidates[static_cast<std::size_t>(i)].path, candidates[static_cast<std::size_t>(j)].path);
      p.pairwise(i, j) = dist;
      p.pairwise(j, i) = dist;
    }
  }
  for (const Candidate &c : candidates) {
    if (c.left_box) {
      p.flags.push_back("left_box:" + c.label);
    }
  }
  const double worst = p.pairwise.maxCoeff();
  if (worst < tol) {
    p.verdict = Verdict::coincide;
  } else if (worst > 10.0 * tol) {
    p.verdict = Verdict::separate;
  } else {
    p.verdict = Verdict::inconclusive;
  }
  p.candidates = std::move(candidates);
  return p;
}

UniquenessProbe probe_uniqueness(const AveragedField &a, const Eigen::Ref<const Eigen::VectorXd> &theta0,
                                 const std::vector<Strategy> &strategies, double tol) {
  if (strategies.size() < 2) {
    throw std::invalid_argument("probe_uniqueness: need at least two strategies");
  }
  const int d = static_cast<int>(theta0.size());
  std::vector<Candidate> cands(strategies.size());
  std::vector<std::string> errors(strategies.size());
  parallel_for(strategies.size(), [&](std::size_t i) {
    const Strategy &s = strategies[i];
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(d);
    if (s.perturbation != 0.0) {
      Engine eng(derive_seed(s.seed, SeedLane::perturbation, i));
      std::normal_distribution<double> normal;
      for (int k = 0; k < d; ++k) {
        rho[k] = normal(eng);
      }
      rho *= s.perturbation / rho.norm();
    }
    SolveConfig cfg;
    cfg.scheme = s.scheme;
    cfg.substeps = s.substeps;
    try {
      const YdeSolution sol = solve_yde(a, theta0 + rho, cfg);
      SampledPath path = sol.theta;
      path.values.rowwise() -= rho.transpose();
      cands[i] = {s.label, std::move(path), sol.left_box};
    } catch (const PicardDivergence &e) {
      cands[i] = {s.label, e.last_iterate, false};
      errors[i] = "picard_divergence:" + s.label;
    }
  });

  if (!(tol > 0.0)) {
    SolveConfig c1, c2;
    c2.substeps = 2;
    const double e = sup_distance(solve_yde(a, theta0, c1).theta, solve_yde(a, theta0, c2).theta);
    tol = std::max(10.0 * e, kProbeTolFloor);
  }
  UniquenessProbe p = probe_candidates(std::move(cands), tol);
  for (const std::string &e : errors) {
    if (!e.empty()) {
      p.flags.push_back(e);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------

double residual_classical(const FieldSpec &b, const SampledPath &x, const SampledPath &w, const SampledPath &beta) {
  if (!(x.grid == w.grid) || !(x.grid == beta.grid)) {
    throw std::invalid_argument("residual_classical: paths live on different grids");
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.dim());
  double r = 0.0;
  for (int k = 0; k < x.grid.n_steps; ++k) {
    acc += eval_field(b, x.at(k)) * beta.increment(k, k + 1);
    r = std::max(r, (x.increment(0, k + 1) - acc - w.increment(0, k + 1)).norm());
  }
  return r;
}

double residual_averaged(const AveragedField &a, const SampledPath &theta) {
  if (!(theta.grid == a.time_grid())) {
    throw std::invalid_argument("residual_averaged: theta must live on A's grid");
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(theta.dim());
  double r = 0.0;
  for (int k = 0; k < theta.grid.n_steps; ++k) {
    acc += a.increment(k, k + 1, theta.at(k));
    r = std::max(r, (theta.increment(0, k + 1) - acc).norm());
  }
  return r;
}

AprioriReport apriori_check(const SampledPath &theta, const AveragedField &a, double gamma, double eta,
                            double lambda) {
  AprioriReport rep;
  rep.left = holder_norm(theta, gamma);
  const double norm_a = estimate_field_holder(a, gamma, eta, lambda).weighted;
  rep.log_left = std::log(rep.left);
  rep.log_right = norm_a * norm_a + std::log1p(theta.at(0).norm());
  rep.violation = rep.log_left > std::log(kAprioriSlack) + rep.log_right;
  for (int k = 0; k < theta.n_nodes(); ++k) {
    if (!a.contains(theta.at(k))) {
      rep.flags.push_back("left_box");
      break;
    }
  }
  return rep;
}

AprioriReport apriori_check_smooth(const SampledPath &theta, const FieldSpec &b, const SampledPath &w,
                                   const SampledPath &beta, double hurst, double delta, double alpha,
                                   const SpaceGrid &space) {
  if (space.dim != 1) {
    throw std::invalid_argument("apriori_check_smooth: the coefficient norm is estimated on a 1-d grid");
  }
  AprioriReport rep;
  rep.left = holder_seminorm(theta, hurst).seminorm;
  Eigen::MatrixXd samples(space.n_nodes(), b.dim() * b.noise_dim());
  for (int j = 0; j < space.n_nodes(); ++j) {
    const Eigen::MatrixXd v = eval_field(b, space.node(j));
    samples.row(j) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), v.size());
  }
  const double b_norm = samples.rowwise().norm().maxCoeff() + holder_seminorm_rows(samples, space.dx(), alpha).seminorm;
  const double beta_h = holder_seminorm(beta, hurst).seminorm;
  const double w_d = holder_seminorm(w, delta).seminorm;
  rep.log_left = std::log(rep.left);
  rep.log_right = std::log1p(b_norm * b_norm * beta_h * beta_h) + std::log1p(w_d);
  rep.violation = rep.log_left > std::log(kAprioriSlack) + rep.log_right;
  return rep;
}

// ---------------------------------------------------------------------------

InitialSampler constant_initial(Eigen::VectorXd x0) {
  return [x0 = std::move(x0)](Engine &) { return x0; };
}

InitialSampler gaussian_initial(Eigen::VectorXd mean, double sd) {
  return [mean = std::move(mean), sd](Engine &eng) {
    std::normal_distribution<double> normal(0.0, sd);
    Eigen::VectorXd x = mean;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      x[k] += normal(eng);
    }
    return x;
  };
}

Ensemble random_initial_ensemble(const FieldSpec &b, const SampledPath &w, const FbmSpec &fbm,
                                 const InitialSampler &sampler, int n, const SolveConfig &cfg,
                                 const SpaceGrid &space) {
  if (n < 2) {
    throw std::invalid_argument("random_initial_ensemble: need at least two samples");
  }
  fbm.validate();
  const FbmGenerator gen(fbm.hurst, w.grid);
  const int d = w.dim();
  Ensemble ens;
  ens.initial.resize(n, d);
  ens.endpoints.resize(n, d);
  std::vector<char> left(static_cast<std::size_t>(n), 0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
    Engine eng(derive_seed(fbm.seed, SeedLane::initial_condition, j));
    const Eigen::VectorXd xi = sampler(eng);
    const SampledPath beta = gen.sample(derive_seed(fbm.seed, SeedLane::beta, j), fbm.dim);
    const SdeSolution s = solve_sde(b, w, beta, xi, cfg, space);
    ens.initial.row(static_cast<Eigen::Index>(j)) = xi.transpose();
    ens.endpoints.row(static_cast<Eigen::Index>(j)) = s.x.values.row(w.grid.n_steps);
    left[j] = s.left_box ? 1 : 0;
  });
  ens.left_box = static_cast<int>(std::count(left.begin(), left.end(), 1));
  ens.mean = ens.endpoints.colwise().mean().transpose();
  ens.variance = (ens.endpoints.rowwise() - ens.mean.transpose()).array().square().colwise().sum().transpose() /
                 static_cast<double>(n - 1);
  return ens;
}

} // namespace yr
