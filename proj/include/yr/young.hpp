#pragma once

#include "yr/averaging.hpp"
#include "yr/paths.hpp"
#include "yr/stats.hpp"

#include <algorithm>
#include <vector>

namespace yr {

struct YoungIntegralResult
{
  SampledPath path;           ///< t ↦ ∫_0^t A(du, θ_u) on θ's grid
  double rate = 0.0;          ///< exponent used to normalise germ_residual
  double germ_residual = 0.0; ///< max over dyadic pairs of |I_{s,t} − A_{s,t}(θ_s)| / |t−s|^rate
  LinearFit germ_decay;       ///< log-log fit of max_s |I_{s,s+h} − A_{s,s+h}(θ_s)| against h
  bool left_box = false;      ///< θ visited points outside A's space grid
};

/// Left-endpoint sum Σ A_{u_k,u_{k+1}}(θ_{u_k}) over θ's grid, which must
/// refine A's time grid by 2^level. `rate` defaults to 1 when not given.
YoungIntegralResult young_integral(const AveragedField &a, const SampledPath &theta, int level, double rate = 1.0);

struct RefinementStudy
{
  std::vector<double> deltas; ///< ‖I_{l+1} − I_l‖_∞ at the coarser nodes, l = 0..levels−1
  LinearFit fit;              ///< fit.slope = decay order per halving of the step
};

/// Refinement order of the left-endpoint sum: the sewing order γ+ην capped at
/// the first-order quadrature rate, min(1, γ + ην).
inline double expected_refinement_rate(double gamma, double eta, double nu) {
  return std::min(1.0, gamma + eta * nu);
}

/// I_l uses θ restricted to A's grid refined by 2^l, for l = 0..levels; θ is
/// given on the finest grid (2^levels).
RefinementStudy refinement_study(const AveragedField &a, const SampledPath &theta_fine, int levels);

} // namespace yr
