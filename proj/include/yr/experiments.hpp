#pragma once

#include "yr/averaging.hpp"
#include "yr/conditions.hpp"
#include "yr/fields.hpp"
#include "yr/paths.hpp"
#include "yr/stats.hpp"
#include "yr/yde.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace yr {

/// w ≡ 0, x_0 = 0, b = PowerLaw{alpha}: the zero solution against sgn(β)|β|^{1/(1−α)}.
struct NonuniquenessConfig
{
  double hurst = 0.75;
  double alpha = 0.5;
  double horizon = 1.0;
  int n_steps = 1 << 14; ///< finest level
  int levels = 5;        ///< n_steps, n_steps/2, ..., n_steps/2^(levels−1)
  int space_cells = 4096;
  double perturbation = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct NonuniquenessLevel
{
  int n_steps = 0;
  double residual_zero = 0.0;
  double residual_branch = 0.0;
  double distance = 0.0;     ///< ‖x¹ − x²‖_∞
  double branch_scale = 0.0; ///< sup|β|^{1/(1−α)}
};

struct NonuniquenessResult
{
  SampledPath beta;   ///< finest level
  SampledPath zero;   ///< x¹
  SampledPath branch; ///< x²
  std::vector<NonuniquenessLevel> levels; ///< coarse to fine
  LinearFit branch_decay;                 ///< refinement rate of the x² residual
  bool zero_residual_exact = false;       ///< x¹ residual is 0 at every level, so no rate is fitted
  double min_separation = 0.0;            ///< min over levels of distance / branch_scale
  UniquenessProbe probe;                  ///< solver strategies plus both closed-form candidates
};

/// Closed-form second solution sgn(β)|β|^{1/(1−α)}.
SampledPath power_law_branch(const SampledPath &beta, double alpha);

NonuniquenessResult demo_nonuniqueness(const NonuniquenessConfig &cfg);

// ---------------------------------------------------------------------------

struct RegularizationConfig
{
  double hurst = 0.75;
  double delta = 0.1;
  double alpha = 0.6;
  double horizon = 1.0;
  int n_steps = 512;
  int space_cells = 256;
  double half_width = 4.0;
  int n_modes = 32;
  int eps_first = 2; ///< ε_k = 2^{−k}, k = eps_first..eps_last
  int eps_last = 7;
  double x0 = 0.0;
  double perturbation = 1e-7;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RegularizationResult
{
  ConditionReport conditions;
  FieldSpec field{SmoothConstant{}};
  SampledPath w;
  SampledPath beta;
  std::vector<double> epsilons;
  std::vector<SampledPath> solutions; ///< x^{ε_k}
  std::vector<double> increments;     ///< ‖x^{ε_k} − x^{ε_{k+1}}‖_∞
  int inversions = 0;
  bool monotone = false; ///< decreasing, up to one inversion within 10%
  UniquenessProbe probe; ///< at the finest ε
  double nonuniqueness_gap = 0.0; ///< sup|β|^{1/(1−α)}: the w ≡ 0 power-law gap for the same β
  int left_box = 0;
};

/// Monotone decrease allowing at most one inversion, which must stay within 10%.
bool cauchy_monotone(const std::vector<double> &increments, int *inversions = nullptr);

RegularizationResult demo_regularization(const RegularizationConfig &cfg);

// ---------------------------------------------------------------------------

struct ScalingConfig
{
  std::vector<double> hursts{0.6, 0.75, 0.9};
  std::vector<double> deltas{0.3, 0.6};
  std::vector<double> alphas{0.6};
  double horizon = 1.0;
  int n_steps = 256;
  int n_samples = 400;
  int n_scales = 6;
  double p = 2.0;
  double x = 0.0;
  double half_width = 4.0;
  int space_cells = 64;
  int n_modes = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ScalingRow
{
  double hurst = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  MomentExponent moments;
  FieldHolderEstimate holder; ///< one Γ^w b sample
  double cor3_margin = 0.0;
};

struct ScalingResult
{
  std::vector<ScalingRow> rows;
};

/// Rows in (H, δ, α) lexicographic order; b is a FourierSeries (mollified at 0.1 when α ≤ 0).
ScalingResult scaling_study(const ScalingConfig &cfg);

} // namespace yr
