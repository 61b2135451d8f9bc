#pragma once

#include "yr/averaging.hpp"
#include "yr/fields.hpp"
#include "yr/paths.hpp"
#include "yr/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace yr {

enum class Scheme { euler, picard };

const char *to_string(Scheme s);
Scheme scheme_from_string(const std::string &s);

struct SolveConfig
{
  Scheme scheme = Scheme::euler;
  int picard_max_iter = 5000;
  double picard_tol = 1e-12;
  int substeps = 1;

  void validate() const;
};

struct YdeSolution
{
  SampledPath theta; ///< on A's time grid
  double residual = 0.0; ///< ‖θ − θ_0 − Σ A_{u_k,u_{k+1}}(θ_{u_k})‖_∞ on the substep grid
  int iterations = 0;    ///< Picard sweeps (1 for Euler)
  bool left_box = false;
};

/// Picard did not reach picard_tol within picard_max_iter sweeps.
class PicardDivergence : public std::runtime_error
{
public:
  PicardDivergence(SampledPath last, double residual, int iterations);
  SampledPath last_iterate;
  double residual;
  int iterations;
};

/// θ_{k+1} = θ_k + A_{u_k,u_{k+1}}(θ_k) on A's grid split into `substeps`
/// pieces (euler), or the fixed point of θ ↦ θ_0 + Σ A_{u_k,u_{k+1}}(θ_{u_k}) (picard).
/// `initial_guess`, if given, seeds the Picard iteration (on A's grid).
YdeSolution solve_yde(const AveragedField &a, const Eigen::Ref<const Eigen::VectorXd> &theta0, const SolveConfig &cfg,
                      const SampledPath *initial_guess = nullptr);

// ---------------------------------------------------------------------------

struct SdeSolution
{
  SampledPath x;     ///< x = θ + w
  SampledPath theta;
  double residual = 0.0;
  bool left_box = false;
};

/// x = θ + w with dθ = A(dt, θ), A = Γ^w b (+ T^w drift), θ_0 = x0 − w_0.
SdeSolution solve_sde(const FieldSpec &b, const SampledPath &w, const SampledPath &beta,
                      const Eigen::Ref<const Eigen::VectorXd> &x0, const SolveConfig &cfg, const SpaceGrid &space,
                      const FieldSpec *drift = nullptr);

/// x_{k+1} = x_k + b(x_k) β_{t_k,t_{k+1}} + w_{t_k,t_{k+1}}.
SampledPath solve_classical_young_sde(const FieldSpec &b, const SampledPath &w, const SampledPath &beta,
                                      const Eigen::Ref<const Eigen::VectorXd> &x0);

// ---------------------------------------------------------------------------

struct FlowMap
{
  Eigen::MatrixXd initial;         ///< one θ_0 per row
  std::vector<SampledPath> paths;  ///< one solution per θ_0
  std::vector<Eigen::MatrixXd> derivative; ///< d = 1 only: ∂θ_t/∂θ_0 per θ_0, (n_nodes × 1), by finite differences
  bool left_box = false;
};

FlowMap solve_flow(const AveragedField &a, const Eigen::MatrixXd &initial, const SolveConfig &cfg);

/// max over t and neighbouring (d = 1, sorted) or all (d > 1) pairs of |θ^i_t − θ^j_t| / |θ^i_0 − θ^j_0|.
double flow_lipschitz(const FlowMap &flow);

/// Header `theta0_1,...,theta0_d,t,x_1,...,x_d`, one row per (θ_0, t).
void write_flow_csv(std::ostream &os, const FlowMap &flow);

// ---------------------------------------------------------------------------

struct ComparisonReport
{
  double sup_distance = 0.0;     ///< ‖θ¹ − θ²‖_∞
  double holder_distance = 0.0;  ///< ⟦θ¹ − θ²⟧_γ (dyadic estimate)
  double initial_distance = 0.0; ///< |θ¹_0 − θ²_0|
  double driver_distance = 0.0;  ///< weighted norm of A¹ − A² with spatial exponent 1 (Lipschitz proxy)
  double ratio = 0.0;            ///< (sup + holder) / (initial + driver), 0 when both inputs vanish
  bool left_box = false;
};

ComparisonReport compare_solutions(const AveragedField &a1, const AveragedField &a2,
                                   const Eigen::Ref<const Eigen::VectorXd> &theta0_1,
                                   const Eigen::Ref<const Eigen::VectorXd> &theta0_2, const SolveConfig &cfg,
                                   double gamma = 0.5, double lambda = 0.5);

// ---------------------------------------------------------------------------

enum class Verdict { coincide, separate, inconclusive };
const char *to_string(Verdict v);

struct Strategy
{
  std::string label;
  Scheme scheme = Scheme::euler;
  int substeps = 1;
  double perturbation = 0.0; ///< restart from θ_0 + ρ, |ρ| = perturbation, then shift back by ρ
  std::uint64_t seed = 0;    ///< direction of ρ (perturbation lane)
};

/// Euler and Picard at substeps {1, 2}, plus one perturbed Euler restart.
std::vector<Strategy> default_strategies(double perturbation = 1e-7, std::uint64_t seed = 0);

struct Candidate
{
  std::string label;
  SampledPath path;
  bool left_box = false;
};

struct UniquenessProbe
{
  std::vector<Candidate> candidates;
  Eigen::MatrixXd pairwise; ///< sup distances
  double tol = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> flags;
};

/// Verdict: coincide iff every pairwise distance < tol; separate iff some distance > 10·tol.
UniquenessProbe probe_candidates(std::vector<Candidate> candidates, double tol);

/// Smallest tolerance used when the observed self-refinement error vanishes.
inline constexpr double kProbeTolFloor = 1e-10;

/// Default tol (when tol ≤ 0): 10 × ‖euler(substeps 1) − euler(substeps 2)‖_∞, floored at kProbeTolFloor.
UniquenessProbe probe_uniqueness(const AveragedField &a, const Eigen::Ref<const Eigen::VectorXd> &theta0,
                                 const std::vector<Strategy> &strategies, double tol = 0.0);

// ---------------------------------------------------------------------------

/// Classical form: max_i |x_i − x_0 − Σ_{k<i} b(x_k) β_{t_k,t_{k+1}} − w_{0,t_i}|.
double residual_classical(const FieldSpec &b, const SampledPath &x, const SampledPath &w, const SampledPath &beta);

/// Averaged form on A's grid: max_i |θ_i − θ_0 − Σ_{k<i} A_{t_k,t_{k+1}}(θ_k)|.
double residual_averaged(const AveragedField &a, const SampledPath &theta);

struct AprioriReport
{
  double left = 0.0;      ///< estimated left-hand side
  double log_right = 0.0; ///< log of the right-hand structure (constants set to 1)
  double log_left = 0.0;
  bool violation = false; ///< left > 10^3 × right
  std::vector<std::string> flags;
};

inline constexpr double kAprioriSlack = 1e3;

/// ‖θ‖_γ ≤ C exp(C ‖A‖²_{γ,η,λ}) (1 + |θ_0|), compared in log space.
AprioriReport apriori_check(const SampledPath &theta, const AveragedField &a, double gamma, double eta,
                            double lambda);

/// ⟦θ⟧_H ≤ C (1 + ‖b‖²_α ⟦β⟧²_H)(1 + ⟦w⟧_δ); ‖b‖_α estimated on the node set of `space`.
AprioriReport apriori_check_smooth(const SampledPath &theta, const FieldSpec &b, const SampledPath &w,
                                   const SampledPath &beta, double hurst, double delta, double alpha,
                                   const SpaceGrid &space);

// ---------------------------------------------------------------------------

using InitialSampler = std::function<Eigen::VectorXd(Engine &)>;

InitialSampler constant_initial(Eigen::VectorXd x0);
InitialSampler gaussian_initial(Eigen::VectorXd mean, double sd);

struct Ensemble
{
  Eigen::MatrixXd initial;   ///< ξ per sample (rows)
  Eigen::MatrixXd endpoints; ///< x_T per sample (rows)
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  int left_box = 0;
};

/// Sample j: β from derive_seed(fbm.seed, beta, j), ξ from derive_seed(fbm.seed, initial_condition, j); w shared.
Ensemble random_initial_ensemble(const FieldSpec &b, const SampledPath &w, const FbmSpec &fbm,
                                 const InitialSampler &sampler, int n, const SolveConfig &cfg,
                                 const SpaceGrid &space);

} // namespace yr
