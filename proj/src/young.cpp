#include "yr/young.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace yr {

YoungIntegralResult young_integral(const AveragedField &a, const SampledPath &theta, int level, double rate) {
  const TimeGrid &ag = a.time_grid();
  if (level < 0 || !(theta.grid.horizon == ag.horizon) || theta.grid.n_steps != (ag.n_steps << level)) {
    throw std::invalid_argument("young_integral: theta's grid must refine A's time grid by 2^level");
  }
  if (theta.dim() != a.space_grid().dim) {
    throw std::invalid_argument("young_integral: theta and A have different spatial dimensions");
  }
  const TimeGrid &tg = theta.grid;
  const int n = tg.n_steps;
  const int out = a.out_dim();
  YoungIntegralResult res;
  res.rate = rate;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n + 1, out);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd x = theta.at(k);
    res.left_box = res.left_box || !a.contains(x);
    const Eigen::VectorXd inc =
        level == 0 ? a.increment(k, k + 1, x) : a.increment_at(tg.node(k), tg.node(k + 1), x);
    v.row(k + 1) = v.row(k) + inc.transpose();
  }
  res.path = SampledPath(tg, std::move(v));

  // A single step is the germ itself; its residual is pure round-off, so the fit starts at two steps.
  std::vector<double> hs, ms;
  for (int g = 1; g <= n; g *= 2) {
    double worst = 0.0;
    for (int s = 0; s + g <= n; ++s) {
      const Eigen::VectorXd germ = level == 0 ? a.increment(s, s + g, theta.at(s))
                                              : a.increment_at(tg.node(s), tg.node(s + g), theta.at(s));
      const double r = (res.path.increment(s, s + g) - germ).norm();
      worst = std::max(worst, r);
      res.germ_residual = std::max(res.germ_residual, r / std::pow(g * tg.dt(), rate));
    }
    if (g > 1 && worst > 0.0) {
      hs.push_back(g * tg.dt());
      ms.push_back(worst);
    }
  }
  if (hs.size() >= 2) {
    res.germ_decay = fit_loglog(Eigen::Map<const Eigen::VectorXd>(hs.data(), static_cast<Eigen::Index>(hs.size())),
                                Eigen::Map<const Eigen::VectorXd>(ms.data(), static_cast<Eigen::Index>(ms.size())));
  }
  return res;
}

RefinementStudy refinement_study(const AveragedField &a, const SampledPath &theta_fine, int levels) {
  if (levels < 2) {
    throw std::invalid_argument("refinement_study: need levels >= 2");
  }
  std::vector<SampledPath> integrals;
  for (int l = 0; l <= levels; ++l) {
    integrals.push_back(young_integral(a, theta_fine.subsampled(levels - l), l).path);
  }
  RefinementStudy st;
  for (int l = 0; l < levels; ++l) {
    const Eigen::MatrixXd &coarse = integrals[static_cast<std::size_t>(l)].values;
    const Eigen::MatrixXd &fine = integrals[static_cast<std::size_t>(l + 1)].values;
    double delta = 0.0;
    for (Eigen::Index i = 0; i < coarse.rows(); ++i) {
      delta = std::max(delta, (fine.row(2 * i) - coarse.row(i)).norm());
    }
    st.deltas.push_back(delta);
  }
  const Eigen::Map<const Eigen::VectorXd> d(st.deltas.data(), static_cast<Eigen::Index>(st.deltas.size()));
  if ((d.array() > 0.0).all()) {
    st.fit = fit_refinement_rate(d);
  }
  return st;
}

} // namespace yr
