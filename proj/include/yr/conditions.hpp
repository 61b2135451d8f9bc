#pragma once

#include <optional>
#include <string>
#include <vector>

namespace yr {

struct ConditionInput
{
  double hurst = 0.75;
  double delta = 0.5;
  double alpha = 0.5;
  std::optional<double> nu; ///< spatial gain of the averaged field; defaults to 1/(2δ) − epsilon
  int n = 1;                ///< flow regularity order for the C^n conditions
  double epsilon = 1e-3;

  void validate() const;
  double effective_nu() const { return nu ? *nu : 1.0 / (2.0 * delta) - epsilon; }
};

struct ConditionResult
{
  std::string name;
  bool holds = false;
  double lhs = 0.0;
  double threshold = 0.0;
  double margin = 0.0; ///< lhs − threshold
};

struct ConditionReport
{
  ConditionInput input;
  double nu = 0.0;
  double gamma_low = 0.0; ///< window (3/2 − H, 1) for the time exponent of T^w b
  std::vector<ConditionResult> results;

  const ConditionResult &get(const std::string &name) const;
};

/// Thresholds on α for w an fBm of parameter δ.
double cor3_threshold(double hurst, double delta, int n = 1);
double cor5_threshold(double hurst, double delta);
/// Their H ↑ 1 limits.
double cor3_limit(double delta);
double cor5_limit(double delta);

/// Spatial regularity α + 2ν(1−γ) of T^w b at time exponent γ.
double interpolated_regularity(double alpha, double nu, double gamma);

/// Entries: thm1, thm2, thm2_flow_n, thm4, thm4_side, cor3, cor3_flow_n, cor5, cor5_domain.
ConditionReport check_conditions(const ConditionInput &in);

} // namespace yr
