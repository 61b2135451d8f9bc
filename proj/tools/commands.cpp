#include "commands.hpp"

#include "yr/experiments.hpp"
#include "yr/rng.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace yr::cli {

Json Config::get_json(const std::string &key, Json fallback) {
  Json v = raw_.contains(key) ? raw_.at(key) : std::move(fallback);
  echo_[key] = v;
  return v;
}

void Config::reject_unknown() const {
  for (const auto &[k, v] : raw_.items()) {
    if (!echo_.contains(k)) {
      throw std::invalid_argument("unknown config key '" + k + "'");
    }
  }
}

namespace {

TimeGrid time_grid(Config &cfg, int n_steps) {
  return TimeGrid(cfg.get("horizon", 1.0), cfg.get("n_steps", n_steps));
}

SpaceGrid space_grid(Config &cfg, int dim, int n_cells) {
  return SpaceGrid(dim, cfg.get("half_width", 4.0), cfg.get("n_cells", n_cells));
}

FieldSpec field(Config &cfg, const std::string &key, const FieldSpec &fallback) {
  return field_from_json(cfg.get_json(key, Json::parse(field_to_json(fallback))).dump());
}

Eigen::VectorXd point(Config &cfg, const std::string &key, int dim) {
  const Json v = cfg.get_json(key, 0.0);
  Eigen::VectorXd x(dim);
  if (v.is_number()) {
    x.setConstant(v.get<double>());
  } else {
    const auto xs = v.get<std::vector<double>>();
    if (static_cast<int>(xs.size()) != dim) {
      throw std::invalid_argument("'" + key + "' must have " + std::to_string(dim) + " entries");
    }
    x = Eigen::Map<const Eigen::VectorXd>(xs.data(), dim);
  }
  return x;
}

Interpolation interpolation(Config &cfg) {
  const std::string s = cfg.get<std::string>("interpolation", "cubic");
  if (s == "cubic") {
    return Interpolation::cubic;
  }
  if (s == "linear") {
    return Interpolation::linear;
  }
  throw std::invalid_argument("interpolation must be cubic or linear");
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

int finish(RunReport &rep) {
  rep.finish();
  for (const Check &c : rep.checks()) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << short_num(c.value)
              << " threshold=" << short_num(c.threshold) << (c.detail.empty() ? "" : " " + c.detail) << '\n';
  }
  return rep.all_pass() ? 0 : 2;
}

std::string holder_csv(const FieldHolderEstimate &e) {
  std::ostringstream os;
  os << "radius,seminorm,norm\n";
  for (std::size_t i = 0; i < e.radii.size(); ++i) {
    os << format_double(e.radii[i]) << ',' << format_double(e.seminorm[i]) << ',' << format_double(e.norm[i]) << '\n';
  }
  return os.str();
}

std::string field_csv(const AveragedField &a) {
  std::ostringstream os;
  write_field_csv(os, a);
  return os.str();
}

struct Exponents
{
  double gamma, eta, lambda;
};

Exponents exponents(Config &cfg) { return {cfg.get("gamma", 0.5), cfg.get("eta", 0.5), cfg.get("lambda", 0.5)}; }

} // namespace

// ---------------------------------------------------------------------------

int cmd_fbm(Config &cfg, const std::string &out) {
  const FbmSpec spec{cfg.get("hurst", 0.75), cfg.get("dim", 1), cfg.get<std::uint64_t>("seed", 0)};
  const TimeGrid grid = time_grid(cfg, 1024);
  cfg.reject_unknown();
  spec.validate();

  RunReport rep("fbm", out, cfg.echo());
  const FbmDraw d = gen_fbm_traced(spec, grid);
  rep.write_file("path.csv", path_csv(d.path));
  rep.results()["method"] = to_string(d.method);
  Json holder = Json::object();
  for (double e : {spec.hurst - 0.1, spec.hurst, spec.hurst + 0.1}) {
    if (e > 0.0 && e <= 1.0) {
      holder[format_double(e)] = holder_seminorm(d.path, e).seminorm;
    }
  }
  rep.results()["holder_seminorm"] = holder;
  rep.add_check("starts_at_zero", d.path.at(0).norm() == 0.0, d.path.at(0).norm(), 0.0);
  return finish(rep);
}

int cmd_average(Config &cfg, const std::string &out) {
  const FieldSpec b = field(cfg, "field", make_bump(0.0, 0.5));
  const double delta = cfg.get("delta", 0.3);
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 0);
  const TimeGrid grid = time_grid(cfg, 256);
  const SpaceGrid space = space_grid(cfg, b.dim(), 64);
  const Interpolation interp = interpolation(cfg);
  const bool occupation = cfg.get("occupation", b.dim() == 1);
  const Exponents ex = exponents(cfg);
  cfg.reject_unknown();

  RunReport rep("average", out, cfg.echo());
  const SampledPath w = gen_fbm({delta, b.dim(), derive_seed(seed, SeedLane::path, 0)}, grid);
  const AveragedField t = compute_T(b, w, space, interp);
  rep.write_file("w.csv", path_csv(w));
  rep.write_file("field.csv", field_csv(t));
  rep.write_file("field.json", field_sidecar(t, {{"field", Json::parse(field_to_json(b))}, {"delta", delta}, {"seed", seed}})
                                   .dump(2) + "\n");
  const FieldHolderEstimate h = estimate_field_holder(t, ex.gamma, ex.eta, ex.lambda);
  rep.results()["holder"] = to_json(h);
  rep.write_file("holder.csv", holder_csv(h));
  if (occupation) {
    const AveragedField via = compute_T_via_occupation(b, compute_occupation(w, space), interp);
    const double worst = (t.values() - via.values()).cwiseAbs().maxCoeff();
    rep.results()["discrepancies"] = {{"occupation_vs_trapezoid", worst}};
    for (const std::string &f : via.flags) {
      rep.add_flag(f);
    }
  }
  rep.add_check("finite", t.values().allFinite(), 0.0, 0.0);
  return finish(rep);
}

int cmd_gamma(Config &cfg, const std::string &out) {
  const FieldSpec b = field(cfg, "field", make_bump(0.0, 0.5));
  const double delta = cfg.get("delta", 0.6);
  const double hurst = cfg.get("hurst", 0.75);
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 0);
  const TimeGrid grid = time_grid(cfg, 256);
  const SpaceGrid space = space_grid(cfg, b.dim(), 64);
  const Interpolation interp = interpolation(cfg);
  const Exponents ex = exponents(cfg);
  cfg.reject_unknown();

  RunReport rep("gamma", out, cfg.echo());
  const SampledPath w = gen_fbm({delta, b.dim(), derive_seed(seed, SeedLane::path, 0)}, grid);
  const SampledPath beta = gen_fbm({hurst, b.noise_dim(), derive_seed(seed, SeedLane::beta, 0)}, grid);
  const AveragedField g = compute_Gamma(b, w, beta, space, interp);
  rep.write_file("w.csv", path_csv(w));
  rep.write_file("beta.csv", path_csv(beta));
  rep.write_file("field.csv", field_csv(g));
  rep.write_file("field.json", field_sidecar(g, {{"field", Json::parse(field_to_json(b))},
                                                 {"delta", delta},
                                                 {"hurst", hurst},
                                                 {"seed", seed}})
                                   .dump(2) + "\n");
  const FieldHolderEstimate h = estimate_field_holder(g, ex.gamma, ex.eta, ex.lambda);
  rep.results()["holder"] = to_json(h);
  rep.results()["slopes"] = {{"time_exponent", h.time_exponent}, {"expected", hurst}};
  rep.results()["r2"] = h.time_exponent_r2;
  rep.write_file("holder.csv", holder_csv(h));
  rep.add_check("finite", g.values().allFinite(), 0.0, 0.0);
  return finish(rep);
}

int cmd_solve(Config &cfg, const std::string &out) {
  const FieldSpec b = field(cfg, "field", make_bump(0.0, 0.5));
  const Json drift_json = cfg.get_json("drift", nullptr);
  const double delta = cfg.get("delta", 0.6);
  const double hurst = cfg.get("hurst", 0.75);
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 0);
  const TimeGrid grid = time_grid(cfg, 256);
  const SpaceGrid space = space_grid(cfg, b.dim(), 128);
  const Eigen::VectorXd x0 = point(cfg, "x0", b.dim());
  SolveConfig sc;
  sc.scheme = scheme_from_string(cfg.get<std::string>("scheme", "euler"));
  sc.substeps = cfg.get("substeps", 1);
  sc.picard_max_iter = cfg.get("picard_max_iter", sc.picard_max_iter);
  sc.picard_tol = cfg.get("picard_tol", sc.picard_tol);
  cfg.reject_unknown();
  sc.validate();

  RunReport rep("solve", out, cfg.echo());
  const SampledPath w = gen_fbm({delta, b.dim(), derive_seed(seed, SeedLane::path, 0)}, grid);
  const SampledPath beta = gen_fbm({hurst, b.noise_dim(), derive_seed(seed, SeedLane::beta, 0)}, grid);
  std::optional<FieldSpec> drift;
  if (!drift_json.is_null()) {
    drift = field_from_json(drift_json.dump());
  }
  const SdeSolution s = solve_sde(b, w, beta, x0, sc, space, drift ? &*drift : nullptr);
  rep.write_file("x.csv", path_csv(s.x));
  rep.write_file("theta.csv", path_csv(s.theta));
  rep.results()["residual"] = s.residual;
  rep.results()["left_box"] = s.left_box;
  if (!drift) {
    const SampledPath classical = solve_classical_young_sde(b, w, beta, x0);
    rep.results()["discrepancies"] = {{"classical_young_euler", sup_distance(classical, s.x)}};
  }
  if (s.left_box) {
    rep.add_flag("left_box");
  }
  rep.add_check("residual", s.residual <= 1e-8, s.residual, 1e-8);
  return finish(rep);
}

int cmd_flow(Config &cfg, const std::string &out) {
  const FieldSpec b = field(cfg, "field", make_bump(0.0, 0.5));
  const double delta = cfg.get("delta", 0.6);
  const double hurst = cfg.get("hurst", 0.75);
  const std::uint64_t seed = cfg.get<std::uint64_t>("seed", 0);
  const TimeGrid grid = time_grid(cfg, 256);
  const SpaceGrid space = space_grid(cfg, 1, 128);
  const double lo = cfg.get("ic_min", -1.0), hi = cfg.get("ic_max", 1.0);
  const int n_ic = cfg.get("ic_points", 17);
  cfg.reject_unknown();
  if (b.dim() != 1) {
    throw std::invalid_argument("flow: only d = 1 fields are supported");
  }
  if (n_ic < 2 || !(hi > lo)) {
    throw std::invalid_argument("flow: need ic_points >= 2 and ic_max > ic_min");
  }

  RunReport rep("flow", out, cfg.echo());
  const SampledPath w = gen_fbm({delta, 1, derive_seed(seed, SeedLane::path, 0)}, grid);
  const SampledPath beta = gen_fbm({hurst, b.noise_dim(), derive_seed(seed, SeedLane::beta, 0)}, grid);
  const AveragedField g = compute_Gamma(b, w, beta, space);
  Eigen::MatrixXd ic(n_ic, 1);
  ic.col(0) = Eigen::VectorXd::LinSpaced(n_ic, lo, hi);
  const FlowMap f = solve_flow(g, ic, {});
  rep.write_file("flow.csv", flow_csv(f));
  const double lip = flow_lipschitz(f);
  rep.results()["lipschitz"] = lip;
  rep.results()["left_box"] = f.left_box;
  if (f.left_box) {
    rep.add_flag("left_box");
  }
  rep.add_check("lipschitz_finite", std::isfinite(lip), lip, 0.0);
  return finish(rep);
}

int cmd_check_conditions(Config &cfg, const std::string &out) {
  ConditionInput in;
  in.hurst = cfg.get("hurst", in.hurst);
  in.delta = cfg.get("delta", in.delta);
  in.alpha = cfg.get("alpha", in.alpha);
  if (cfg.has("nu")) {
    in.nu = cfg.get("nu", 0.0);
  }
  in.n = cfg.get("n", in.n);
  in.epsilon = cfg.get("epsilon", in.epsilon);
  cfg.get<std::uint64_t>("seed", 0);
  cfg.reject_unknown();

  RunReport rep("check-conditions", out, cfg.echo());
  const ConditionReport r = check_conditions(in);
  std::ostringstream os;
  os << "name,holds,lhs,threshold,margin\n";
  for (const ConditionResult &c : r.results) {
    os << c.name << ',' << (c.holds ? 1 : 0) << ',' << format_double(c.lhs) << ',' << format_double(c.threshold) << ','
       << format_double(c.margin) << '\n';
    std::cout << (c.holds ? "holds   " : "fails   ") << c.name << "  margin " << format_double(c.margin) << '\n';
  }
  rep.write_file("conditions.csv", os.str());
  rep.results()["conditions"] = to_json(r);
  rep.results()["limits"] = {{"cor3_h_to_1", cor3_limit(in.delta)}, {"cor5_h_to_1", cor5_limit(in.delta)}};
  return finish(rep);
}

int cmd_demo_nonuniqueness(Config &cfg, const std::string &out) {
  NonuniquenessConfig c;
  c.hurst = cfg.get("hurst", c.hurst);
  c.alpha = cfg.get("alpha", c.alpha);
  c.horizon = cfg.get("horizon", c.horizon);
  c.n_steps = cfg.get("n_steps", c.n_steps);
  c.levels = cfg.get("levels", c.levels);
  c.space_cells = cfg.get("space_cells", c.space_cells);
  c.perturbation = cfg.get("perturbation", c.perturbation);
  c.seed = cfg.get("seed", c.seed);
  cfg.reject_unknown();
  c.validate();

  RunReport rep("demo-nonuniqueness", out, cfg.echo());
  const NonuniquenessResult r = demo_nonuniqueness(c);
  rep.write_file("beta.csv", path_csv(r.beta));
  std::ostringstream cand, lv;
  cand << "t,x1,x2\n";
  for (int i = 0; i < r.beta.n_nodes(); ++i) {
    cand << format_double(r.beta.grid.node(i)) << ',' << format_double(r.zero.values(i, 0)) << ','
         << format_double(r.branch.values(i, 0)) << '\n';
  }
  lv << "n_steps,residual_x1,residual_x2,distance,branch_scale\n";
  Json levels = Json::array();
  for (const NonuniquenessLevel &l : r.levels) {
    lv << l.n_steps << ',' << format_double(l.residual_zero) << ',' << format_double(l.residual_branch) << ','
       << format_double(l.distance) << ',' << format_double(l.branch_scale) << '\n';
    levels.push_back({{"n_steps", l.n_steps},
                      {"residual_x1", l.residual_zero},
                      {"residual_x2", l.residual_branch},
                      {"distance", l.distance},
                      {"branch_scale", l.branch_scale}});
  }
  rep.write_file("candidates.csv", cand.str());
  rep.write_file("levels.csv", lv.str());
  rep.results()["levels"] = levels;
  rep.results()["slopes"] = {{"residual_x2", r.branch_decay.slope}};
  rep.results()["r2"] = {{"residual_x2", r.branch_decay.r2}};
  rep.results()["residual_x1_exact_zero"] = r.zero_residual_exact;
  rep.results()["probe"] = to_json(r.probe);
  for (const std::string &f : r.probe.flags) {
    rep.add_flag(f);
  }
  rep.add_check("residual_x1_decays", r.zero_residual_exact, r.levels.back().residual_zero, 0.0, "exact zero at every level");
  rep.add_check("residual_x2_decays", r.branch_decay.slope > 0.0, r.branch_decay.slope, 0.0, "refinement rate");
  rep.add_check("final_residual", r.levels.back().residual_branch < 1e-2, r.levels.back().residual_branch, 1e-2);
  rep.add_check("separation", r.min_separation >= 0.5, r.min_separation, 0.5, "distance / sup|beta|^(1/(1-alpha))");
  rep.add_check("verdict_separate", r.probe.verdict == Verdict::separate, r.probe.pairwise.maxCoeff(), 10.0 * r.probe.tol,
                to_string(r.probe.verdict));
  return finish(rep);
}

int cmd_demo_regularization(Config &cfg, const std::string &out) {
  RegularizationConfig c;
  c.hurst = cfg.get("hurst", c.hurst);
  c.delta = cfg.get("delta", c.delta);
  c.alpha = cfg.get("alpha", c.alpha);
  c.horizon = cfg.get("horizon", c.horizon);
  c.n_steps = cfg.get("n_steps", c.n_steps);
  c.space_cells = cfg.get("space_cells", c.space_cells);
  c.half_width = cfg.get("half_width", c.half_width);
  c.n_modes = cfg.get("n_modes", c.n_modes);
  c.eps_first = cfg.get("eps_first", c.eps_first);
  c.eps_last = cfg.get("eps_last", c.eps_last);
  c.x0 = cfg.get("x0", c.x0);
  c.perturbation = cfg.get("perturbation", c.perturbation);
  c.seed = cfg.get("seed", c.seed);
  cfg.reject_unknown();
  c.validate();

  RunReport rep("demo-regularization", out, cfg.echo());
  const RegularizationResult r = demo_regularization(c);
  rep.write_file("w.csv", path_csv(r.w));
  rep.write_file("beta.csv", path_csv(r.beta));
  std::ostringstream sol, inc;
  sol << 't';
  for (std::size_t k = 0; k < r.epsilons.size(); ++k) {
    sol << ",x_eps_" << c.eps_first + static_cast<int>(k);
  }
  sol << '\n';
  for (int i = 0; i < r.w.n_nodes(); ++i) {
    sol << format_double(r.w.grid.node(i));
    for (const SampledPath &x : r.solutions) {
      sol << ',' << format_double(x.values(i, 0));
    }
    sol << '\n';
  }
  inc << "k,epsilon,increment\n";
  for (std::size_t k = 0; k < r.increments.size(); ++k) {
    inc << c.eps_first + static_cast<int>(k) << ',' << format_double(r.epsilons[k]) << ','
        << format_double(r.increments[k]) << '\n';
  }
  rep.write_file("solutions.csv", sol.str());
  rep.write_file("increments.csv", inc.str());
  rep.results()["conditions"] = to_json(r.conditions);
  rep.results()["increments"] = r.increments;
  rep.results()["inversions"] = r.inversions;
  rep.results()["probe"] = to_json(r.probe);
  rep.results()["nonuniqueness_gap"] = r.nonuniqueness_gap;
  rep.results()["left_box"] = r.left_box;
  for (const std::string &f : r.probe.flags) {
    rep.add_flag(f);
  }
  if (r.left_box > 0) {
    rep.add_flag("left_box");
  }
  const ConditionResult &cor3 = r.conditions.get("cor3");
  rep.add_check("cor3_margin", cor3.holds, cor3.margin, 0.0);
  rep.add_check("cauchy_monotone", r.monotone, r.inversions, 1.0, "inversions allowed within 10%");
  rep.add_check("verdict_coincide", r.probe.verdict == Verdict::coincide, r.probe.pairwise.maxCoeff(), r.probe.tol,
                to_string(r.probe.verdict));
  return finish(rep);
}

int cmd_scaling_study(Config &cfg, const std::string &out) {
  ScalingConfig c;
  c.hursts = cfg.get("hursts", c.hursts);
  c.deltas = cfg.get("deltas", c.deltas);
  c.alphas = cfg.get("alphas", c.alphas);
  c.horizon = cfg.get("horizon", c.horizon);
  c.n_steps = cfg.get("n_steps", c.n_steps);
  c.n_samples = cfg.get("n_samples", c.n_samples);
  c.n_scales = cfg.get("n_scales", c.n_scales);
  c.p = cfg.get("p", c.p);
  c.x = cfg.get("x", c.x);
  c.half_width = cfg.get("half_width", c.half_width);
  c.space_cells = cfg.get("space_cells", c.space_cells);
  c.n_modes = cfg.get("n_modes", c.n_modes);
  c.seed = cfg.get("seed", c.seed);
  const double tol = cfg.get("slope_tolerance", 0.15);
  cfg.reject_unknown();
  c.validate();

  RunReport rep("scaling-study", out, cfg.echo());
  const ScalingResult r = scaling_study(c);
  std::ostringstream slopes, moments;
  slopes << "hurst,delta,alpha,slope,r2,band_low,band_high,expected,time_exponent,weighted_norm,cor3_margin\n";
  moments << "hurst,delta,alpha,scale,lp_norm\n";
  std::vector<PlotSeries> series;
  Json rows = Json::array();
  for (const ScalingRow &row : r.rows) {
    const std::string key = format_double(row.hurst) + ',' + format_double(row.delta) + ',' + format_double(row.alpha);
    slopes << key << ',' << format_double(row.moments.slope) << ',' << format_double(row.moments.r2) << ','
           << format_double(row.moments.band_low) << ',' << format_double(row.moments.band_high) << ','
           << format_double(row.hurst) << ',' << format_double(row.holder.time_exponent) << ','
           << format_double(row.holder.weighted) << ',' << format_double(row.cor3_margin) << '\n';
    const std::string label = "H=" + short_num(row.hurst) + " delta=" + short_num(row.delta) + " alpha=" + short_num(row.alpha);
    PlotSeries s{label, {}, {}};
    for (Eigen::Index i = 0; i < row.moments.scales.size(); ++i) {
      moments << key << ',' << format_double(row.moments.scales[i]) << ',' << format_double(row.moments.lp_norms[i]) << '\n';
      s.x.push_back(row.moments.scales[i]);
      s.y.push_back(row.moments.lp_norms[i]);
    }
    series.push_back(std::move(s));
    rows.push_back({{"hurst", row.hurst},
                    {"delta", row.delta},
                    {"alpha", row.alpha},
                    {"moments", to_json(row.moments)},
                    {"holder", to_json(row.holder)},
                    {"cor3_margin", row.cor3_margin}});
    rep.add_check("moment_slope " + label,
                  row.moments.slope >= row.hurst - tol, row.moments.slope, row.hurst - tol, "slope >= H - tolerance");
  }
  rep.write_file("slopes.csv", slopes.str());
  rep.write_file("moments.csv", moments.str());
  rep.write_file("moments.svg", svg_loglog("L^p norm of the multiplicative averaged field", "|t - s|", "L^p norm", series));
  rep.results()["rows"] = rows;
  return finish(rep);
}

} // namespace yr::cli
