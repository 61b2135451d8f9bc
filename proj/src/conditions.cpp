#include "yr/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace yr {

void ConditionInput::validate() const {
  if (!(hurst > 0.5 && hurst < 1.0)) {
    throw std::invalid_argument("conditions: H must lie in (1/2, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("conditions: delta must lie in (0, 1)");
  }
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("conditions: alpha must be finite");
  }
  if (n < 1) {
    throw std::invalid_argument("conditions: n must be >= 1");
  }
  if (!(epsilon > 0.0) || epsilon >= 1.0 / (2.0 * delta)) {
    throw std::invalid_argument("conditions: epsilon must lie in (0, 1/(2 delta))");
  }
  if (nu && !(*nu > 0.0 && std::isfinite(*nu))) {
    throw std::invalid_argument("conditions: nu must be positive");
  }
}

const ConditionResult &ConditionReport::get(const std::string &name) const {
  for (const ConditionResult &r : results) {
    if (r.name == name) {
      return r;
    }
  }
  throw std::out_of_range("no condition named '" + name + "'");
}

double cor3_threshold(double hurst, double delta, int n) { return n + 1.0 - (hurst - 0.5) / delta; }

double cor5_threshold(double hurst, double delta) {
  return std::max((1.0 - hurst) / delta, 1.0 + 1.0 / (2.0 * hurst) - (hurst - 0.5) / delta);
}

double cor3_limit(double delta) { return 2.0 - 1.0 / (2.0 * delta); }

double cor5_limit(double delta) { return std::max(0.0, 1.5 - 1.0 / (2.0 * delta)); }

double interpolated_regularity(double alpha, double nu, double gamma) { return alpha + 2.0 * nu * (1.0 - gamma); }

namespace {

ConditionResult strict(std::string name, double lhs, double threshold) {
  return {std::move(name), lhs > threshold, lhs, threshold, lhs - threshold};
}

} // namespace

ConditionReport check_conditions(const ConditionInput &in) {
  in.validate();
  ConditionReport rep;
  rep.input = in;
  rep.nu = in.effective_nu();
  rep.gamma_low = 1.5 - in.hurst;
  const double h = in.hurst, d = in.delta, a = in.alpha;
  const double gain = a + rep.nu * (2.0 * h - 1.0);

  // Spatial regularity C^2 at some γ in (3/2 − H, 1): the supremum over the window sits at its open left end.
  rep.results.push_back(strict("thm1", interpolated_regularity(a, rep.nu, rep.gamma_low), 2.0));
  rep.results.push_back(strict("thm2", gain, 2.0));
  rep.results.push_back(strict("thm2_flow_n", gain, in.n + 1.0));
  rep.results.push_back(strict("thm4", gain, 1.0 + 1.0 / (2.0 * h)));
  rep.results.push_back(strict("thm4_side", h + a * d, 1.0));
  rep.results.push_back(strict("cor3", a, cor3_threshold(h, d)));
  rep.results.push_back(strict("cor3_flow_n", a, cor3_threshold(h, d, in.n)));
  rep.results.push_back(strict("cor5", a, cor5_threshold(h, d)));
  rep.results.push_back(strict("cor5_domain", 1.0, d + h));
  return rep;
}

} // namespace yr
