#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace yr {

struct LinearFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y ≈ intercept + slope·x.
template <typename DerivedX, typename DerivedY>
LinearFit fit_line(const Eigen::MatrixBase<DerivedX> &x, const Eigen::MatrixBase<DerivedY> &y) {
  const Eigen::Index n = x.size();
  if (n != y.size() || n < 2) {
    throw std::invalid_argument("fit_line: need at least two paired samples");
  }
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::ArrayXd dx = x.derived().array() - mx;
  const Eigen::ArrayXd dy = y.derived().array() - my;
  const double sxx = (dx * dx).sum();
  const double syy = (dy * dy).sum();
  const double sxy = (dx * dy).sum();
  if (sxx <= 0.0) {
    throw std::invalid_argument("fit_line: degenerate abscissae");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sse = (dy - fit.slope * dx).square().sum();
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.slope_stderr = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

/// Fits log(values) against log(scales); returns the power-law exponent.
template <typename DerivedX, typename DerivedY>
LinearFit fit_loglog(const Eigen::MatrixBase<DerivedX> &scales, const Eigen::MatrixBase<DerivedY> &values) {
  const Eigen::VectorXd lx = scales.derived().array().log().matrix();
  const Eigen::VectorXd ly = values.derived().array().log().matrix();
  return fit_line(lx, ly);
}

/// Decay order of a refinement sequence: deltas[k] ~ C·2^{-rate·k}.
template <typename Derived>
LinearFit fit_refinement_rate(const Eigen::MatrixBase<Derived> &deltas) {
  const Eigen::Index n = deltas.size();
  const Eigen::VectorXd level = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
  const Eigen::VectorXd l2 = (deltas.derived().array().log() / std::log(2.0)).matrix();
  LinearFit fit = fit_line(level, l2);
  fit.slope = -fit.slope;
  return fit;
}

} // namespace yr
