#include "yr/fields.hpp"

#include "yr/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace yr {

namespace {

void validate(const PowerLaw &v) {
  if (!(v.alpha > 0.0 && v.alpha < 1.0)) {
    throw std::invalid_argument("PowerLaw: alpha must lie in (0, 1)");
  }
  if (v.dim < 1) {
    throw std::invalid_argument("PowerLaw: dim must be positive");
  }
}

void validate(const FourierSeries &v) {
  if (v.n_modes < 1) {
    throw std::invalid_argument("FourierSeries: n_modes must be >= 1");
  }
  if (!(v.box_half_width > 0.0)) {
    throw std::invalid_argument("FourierSeries: box_half_width must be positive");
  }
  if (v.dim < 1) {
    throw std::invalid_argument("FourierSeries: dim must be positive");
  }
}

/// Tensor Gauss rule on [−1,1]^d restricted to the unit ball, with the kernel
/// value ρ(u) = (1 − |u|²)^4 folded into the weights.
struct KernelRule
{
  Eigen::MatrixXd points;  // d × Q
  Eigen::VectorXd weights; // W_q ρ(u_q) / Σ W ρ
  Eigen::MatrixXd grad_weights; // d × Q: W_q ∂_kρ(u_q) / Σ W ρ
};

const KernelRule &kernel_rule(int dim) {
  if (dim < 1 || dim > 3) {
    throw std::invalid_argument("mollifier: dimension must be 1, 2 or 3");
  }
  static const auto build = [](int d) {
    const GaussRule g = gauss_legendre(kMollifierOrder);
    const int n = kMollifierOrder;
    int total = 1;
    for (int k = 0; k < d; ++k) {
      total *= n;
    }
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> w;
    std::vector<Eigen::VectorXd> gw;
    for (int flat = 0; flat < total; ++flat) {
      Eigen::VectorXd u(d);
      double wq = 1.0;
      int rem = flat;
      for (int k = 0; k < d; ++k) {
        const int idx = rem % n;
        rem /= n;
        u[k] = g.nodes[idx];
        wq *= g.weights[idx];
      }
      const double r2 = u.squaredNorm();
      if (r2 >= 1.0) {
        continue;
      }
      const double base = 1.0 - r2;
      pts.push_back(u);
      w.push_back(wq * std::pow(base, 4));
      gw.push_back(wq * (-8.0) * std::pow(base, 3) * u);
    }
    KernelRule rule;
    const auto q = static_cast<Eigen::Index>(pts.size());
    rule.points.resize(d, q);
    rule.weights.resize(q);
    rule.grad_weights.resize(d, q);
    double norm = 0.0;
    for (double v : w) {
      norm += v;
    }
    for (Eigen::Index i = 0; i < q; ++i) {
      rule.points.col(i) = pts[static_cast<std::size_t>(i)];
      rule.weights[i] = w[static_cast<std::size_t>(i)] / norm;
      rule.grad_weights.col(i) = gw[static_cast<std::size_t>(i)] / norm;
    }
    return rule;
  };
  static const KernelRule rules[3] = {build(1), build(2), build(3)};
  return rules[dim - 1];
}

std::shared_ptr<const FieldSpec::Modes> draw_modes(const FourierSeries &v) {
  auto modes = std::make_shared<FieldSpec::Modes>();
  const int rows = v.dim * v.dim;
  modes->cos_coef.resize(rows, v.n_modes);
  modes->sin_coef.resize(rows, v.n_modes);
  modes->frequency.resize(v.n_modes);
  Engine engine(derive_seed(v.seed, SeedLane::field, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < rows; ++r) {
    for (int k = 1; k <= v.n_modes; ++k) {
      const double decay = std::pow(static_cast<double>(k), -(v.regularity_alpha + 0.5));
      modes->cos_coef(r, k - 1) = decay * normal(engine);
      modes->sin_coef(r, k - 1) = decay * normal(engine);
    }
  }
  for (int k = 1; k <= v.n_modes; ++k) {
    modes->frequency[k - 1] = std::numbers::pi * k / v.box_half_width;
  }
  return modes;
}

/// Applies the quadrature-induced multiplier of the ε-mollifier to each mode.
std::shared_ptr<const FieldSpec::Modes> damp_modes(const FieldSpec::Modes &in, int dim, double eps) {
  auto out = std::make_shared<FieldSpec::Modes>(in);
  const KernelRule &rule = kernel_rule(dim);
  for (Eigen::Index r = 0; r < in.cos_coef.rows(); ++r) {
    const auto axis = static_cast<Eigen::Index>(r % dim);
    for (Eigen::Index k = 0; k < in.frequency.size(); ++k) {
      const double omega = in.frequency[k] * eps;
      double mult = 0.0;
      for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
        mult += rule.weights[q] * std::cos(omega * rule.points(axis, q));
      }
      out->cos_coef(r, k) *= mult;
      out->sin_coef(r, k) *= mult;
    }
  }
  return out;
}

Eigen::MatrixXd eval_modes(const FieldSpec::Modes &modes, int dim, const Eigen::Ref<const Eigen::VectorXd> &x) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  const auto n_modes = modes.frequency.size();
  const double base = modes.frequency[0];
  for (int a = 0; a < dim; ++a) {
    // e^{i k ω_1 x} by recurrence; ω_k = k ω_1.
    const std::complex<double> step(std::cos(base * x[a]), std::sin(base * x[a]));
    std::complex<double> phase = step;
    Eigen::VectorXd c(n_modes), s(n_modes);
    for (Eigen::Index k = 0; k < n_modes; ++k) {
      c[k] = phase.real();
      s[k] = phase.imag();
      phase *= step;
    }
    for (int i = 0; i < dim; ++i) {
      const int r = i * dim + a;
      out(i, i) += modes.cos_coef.row(r).dot(c) + modes.sin_coef.row(r).dot(s);
    }
  }
  return out;
}

FieldGradient grad_modes(const FieldSpec::Modes &modes, int dim, const Eigen::Ref<const Eigen::VectorXd> &x) {
  FieldGradient g(static_cast<std::size_t>(dim), Eigen::MatrixXd::Zero(dim, dim));
  const auto n_modes = modes.frequency.size();
  const double base = modes.frequency[0];
  for (int a = 0; a < dim; ++a) {
    const std::complex<double> step(std::cos(base * x[a]), std::sin(base * x[a]));
    std::complex<double> phase = step;
    Eigen::VectorXd dc(n_modes), ds(n_modes);
    for (Eigen::Index k = 0; k < n_modes; ++k) {
      dc[k] = -modes.frequency[k] * phase.imag();
      ds[k] = modes.frequency[k] * phase.real();
      phase *= step;
    }
    for (int i = 0; i < dim; ++i) {
      const int r = i * dim + a;
      g[static_cast<std::size_t>(a)](i, i) += modes.cos_coef.row(r).dot(dc) + modes.sin_coef.row(r).dot(ds);
    }
  }
  return g;
}

} // namespace

// ---------------------------------------------------------------------------

FieldSpec::FieldSpec(PowerLaw v) {
  validate(v);
  variant_ = std::make_shared<const FieldVariant>(v);
}

FieldSpec::FieldSpec(FourierSeries v) {
  validate(v);
  modes_ = draw_modes(v);
  variant_ = std::make_shared<const FieldVariant>(v);
}

FieldSpec::FieldSpec(SmoothConstant v) {
  if (v.value.size() == 0) {
    throw std::invalid_argument("SmoothConstant: empty value");
  }
  variant_ = std::make_shared<const FieldVariant>(std::move(v));
}

FieldSpec::FieldSpec(SmoothIdentity v) {
  if (v.dim < 1) {
    throw std::invalid_argument("SmoothIdentity: dim must be positive");
  }
  variant_ = std::make_shared<const FieldVariant>(v);
}

FieldSpec::FieldSpec(SmoothGaussianBump v) {
  if (!(v.width > 0.0) || v.center.size() < 1) {
    throw std::invalid_argument("SmoothGaussianBump: need width > 0 and a center");
  }
  variant_ = std::make_shared<const FieldVariant>(std::move(v));
}

FieldSpec::FieldSpec(Mollified v) {
  if (!(v.epsilon > 0.0) || !std::isfinite(v.epsilon)) {
    throw std::invalid_argument("mollify: epsilon must be positive");
  }
  if (v.inner->modes_) {
    modes_ = damp_modes(*v.inner->modes_, v.inner->dim(), v.epsilon);
  }
  variant_ = std::make_shared<const FieldVariant>(std::move(v));
}

int FieldSpec::dim() const {
  return std::visit(
      [](const auto &v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SmoothConstant>) {
          return static_cast<int>(v.value.rows());
        } else if constexpr (std::is_same_v<T, SmoothGaussianBump>) {
          return static_cast<int>(v.center.size());
        } else if constexpr (std::is_same_v<T, Mollified>) {
          return v.inner->dim();
        } else {
          return v.dim;
        }
      },
      *variant_);
}

int FieldSpec::noise_dim() const {
  return std::visit(
      [this](const auto &v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SmoothConstant>) {
          return static_cast<int>(v.value.cols());
        } else if constexpr (std::is_same_v<T, Mollified>) {
          return v.inner->noise_dim();
        } else {
          return dim();
        }
      },
      *variant_);
}

bool FieldSpec::pointwise() const {
  if (const auto *f = std::get_if<FourierSeries>(variant_.get())) {
    return f->regularity_alpha > 0.0;
  }
  return true;
}

FieldSpec make_constant(double c) { return FieldSpec(SmoothConstant{Eigen::MatrixXd::Constant(1, 1, c)}); }

FieldSpec make_identity(int dim) { return FieldSpec(SmoothIdentity{dim}); }

FieldSpec make_bump(double center, double width) {
  return FieldSpec(SmoothGaussianBump{Eigen::VectorXd::Constant(1, center), width});
}

FieldSpec mollify(const FieldSpec &spec, double epsilon) {
  return FieldSpec(Mollified{std::make_shared<const FieldSpec>(spec), epsilon});
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd eval_field(const FieldSpec &spec, const Eigen::Ref<const Eigen::VectorXd> &x) {
  const int d = spec.dim();
  if (x.size() != d) {
    throw std::invalid_argument("eval_field: point dimension mismatch");
  }
  return std::visit(
      [&](const auto &v) -> Eigen::MatrixXd {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
          for (int i = 0; i < d; ++i) {
            out(i, i) = std::pow(std::abs(x[i]), v.alpha) / (1.0 - v.alpha);
          }
          return out;
        } else if constexpr (std::is_same_v<T, FourierSeries>) {
          return eval_modes(spec.modes(), d, x);
        } else if constexpr (std::is_same_v<T, SmoothConstant>) {
          return v.value;
        } else if constexpr (std::is_same_v<T, SmoothIdentity>) {
          return x.asDiagonal();
        } else if constexpr (std::is_same_v<T, SmoothGaussianBump>) {
          const double r2 = (x - v.center).squaredNorm();
          return Eigen::MatrixXd::Identity(d, d) * std::exp(-0.5 * r2 / (v.width * v.width));
        } else {
          if (spec.has_modes()) {
            return eval_modes(spec.modes(), d, x);
          }
          const KernelRule &rule = kernel_rule(d);
          Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, spec.noise_dim());
          for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
            const Eigen::VectorXd y = x - v.epsilon * rule.points.col(q);
            acc += rule.weights[q] * eval_field(*v.inner, y);
          }
          return acc;
        }
      },
      spec.variant());
}

double eval_scalar(const FieldSpec &spec, double x) {
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, x);
  return eval_field(spec, p)(0, 0);
}

FieldGradient eval_gradient(const FieldSpec &spec, const Eigen::Ref<const Eigen::VectorXd> &x) {
  const int d = spec.dim();
  const int m = spec.noise_dim();
  if (x.size() != d) {
    throw std::invalid_argument("eval_gradient: point dimension mismatch");
  }
  FieldGradient zero(static_cast<std::size_t>(d), Eigen::MatrixXd::Zero(d, m));
  return std::visit(
      [&](const auto &v) -> FieldGradient {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          FieldGradient g = zero;
          for (int i = 0; i < d; ++i) {
            if (x[i] == 0.0) {
              throw std::domain_error("eval_gradient: PowerLaw is not differentiable at 0");
            }
            const double s = x[i] > 0.0 ? 1.0 : -1.0;
            g[static_cast<std::size_t>(i)](i, i) = v.alpha / (1.0 - v.alpha) * s * std::pow(std::abs(x[i]), v.alpha - 1.0);
          }
          return g;
        } else if constexpr (std::is_same_v<T, FourierSeries>) {
          if (!spec.pointwise()) {
            throw std::domain_error("eval_gradient: distributional FourierSeries must be mollified first");
          }
          return grad_modes(spec.modes(), d, x);
        } else if constexpr (std::is_same_v<T, SmoothConstant>) {
          return zero;
        } else if constexpr (std::is_same_v<T, SmoothIdentity>) {
          FieldGradient g = zero;
          for (int i = 0; i < d; ++i) {
            g[static_cast<std::size_t>(i)](i, i) = 1.0;
          }
          return g;
        } else if constexpr (std::is_same_v<T, SmoothGaussianBump>) {
          const Eigen::VectorXd diff = x - v.center;
          const double w2 = v.width * v.width;
          const double value = std::exp(-0.5 * diff.squaredNorm() / w2);
          FieldGradient g = zero;
          for (int k = 0; k < d; ++k) {
            g[static_cast<std::size_t>(k)] = Eigen::MatrixXd::Identity(d, d) * (-diff[k] / w2 * value);
          }
          return g;
        } else {
          if (spec.has_modes()) {
            return grad_modes(spec.modes(), d, x);
          }
          // ∂_k b^ε(x) = ε^{-1} ∫ ∂_kρ(u) b(x − εu) du
          const KernelRule &rule = kernel_rule(d);
          FieldGradient g = zero;
          for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
            const Eigen::VectorXd y = x - v.epsilon * rule.points.col(q);
            const Eigen::MatrixXd b = eval_field(*v.inner, y);
            for (int k = 0; k < d; ++k) {
              g[static_cast<std::size_t>(k)] += (rule.grad_weights(k, q) / v.epsilon) * b;
            }
          }
          return g;
        }
      },
      spec.variant());
}

// ---------------------------------------------------------------------------

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        break;
      }
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json to_json_value(const FieldSpec &spec) {
  return std::visit(
      [](const auto &v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return {{"variant", "power_law"}, {"alpha", v.alpha}, {"dim", v.dim}};
        } else if constexpr (std::is_same_v<T, FourierSeries>) {
          return {{"variant", "fourier_series"}, {"n_modes", v.n_modes}, {"regularity_alpha", v.regularity_alpha},
                  {"box_half_width", v.box_half_width}, {"seed", v.seed}, {"dim", v.dim}};
        } else if constexpr (std::is_same_v<T, SmoothConstant>) {
          json rows = json::array();
          for (Eigen::Index i = 0; i < v.value.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < v.value.cols(); ++j) {
              row.push_back(v.value(i, j));
            }
            rows.push_back(row);
          }
          return {{"variant", "constant"}, {"value", rows}};
        } else if constexpr (std::is_same_v<T, SmoothIdentity>) {
          return {{"variant", "identity"}, {"dim", v.dim}};
        } else if constexpr (std::is_same_v<T, SmoothGaussianBump>) {
          return {{"variant", "gaussian_bump"},
                  {"center", std::vector<double>(v.center.data(), v.center.data() + v.center.size())},
                  {"width", v.width}};
        } else {
          return {{"variant", "mollified"}, {"epsilon", v.epsilon}, {"inner", to_json_value(*v.inner)}};
        }
      },
      spec.variant());
}

FieldSpec from_json_value(const json &j) {
  const std::string kind = j.at("variant").get<std::string>();
  if (kind == "power_law") {
    return FieldSpec(PowerLaw{j.at("alpha").get<double>(), j.value("dim", 1)});
  }
  if (kind == "fourier_series") {
    return FieldSpec(FourierSeries{j.at("n_modes").get<int>(), j.at("regularity_alpha").get<double>(),
                                   j.at("box_half_width").get<double>(), j.at("seed").get<std::uint64_t>(),
                                   j.value("dim", 1)});
  }
  if (kind == "constant") {
    const json &rows = j.at("value");
    if (rows.is_number()) {
      return make_constant(rows.get<double>());
    }
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index k = 0; k < c; ++k) {
        m(i, k) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<double>();
      }
    }
    return FieldSpec(SmoothConstant{m});
  }
  if (kind == "identity") {
    return FieldSpec(SmoothIdentity{j.value("dim", 1)});
  }
  if (kind == "gaussian_bump") {
    const auto c = j.at("center").get<std::vector<double>>();
    return FieldSpec(SmoothGaussianBump{Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())),
                                        j.at("width").get<double>()});
  }
  if (kind == "mollified") {
    return mollify(from_json_value(j.at("inner")), j.at("epsilon").get<double>());
  }
  throw std::invalid_argument("field_from_json: unknown variant '" + kind + "'");
}

} // namespace

std::string field_to_json(const FieldSpec &spec) { return to_json_value(spec).dump(); }

FieldSpec field_from_json(const std::string &text) { return from_json_value(json::parse(text)); }

} // namespace yr
