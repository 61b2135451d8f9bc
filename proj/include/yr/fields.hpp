#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace yr {

/// f(z) = |z|^α / (1−α), applied to each coordinate; output diag(f(x_1),...,f(x_d)).
/// Even in z: y(t) = sgn(t)|t|^{1/(1−α)} solves y' = f(y) on all of R.
struct PowerLaw
{
  double alpha = 0.5;
  int dim = 1;
};

/// b(x) = Σ_{k=1..K} k^{−(α+1/2)} (ξ_k cos(πkx/L) + ζ_k sin(πkx/L)) with ξ, ζ
/// standard normal drawn from `seed`. For d > 1 each diagonal entry is a sum
/// of independent 1-d series, one per axis.
struct FourierSeries
{
  int n_modes = 32;
  double regularity_alpha = 0.5;
  double box_half_width = 4.0;
  std::uint64_t seed = 0;
  int dim = 1;
};

struct SmoothConstant
{
  Eigen::MatrixXd value = Eigen::MatrixXd::Ones(1, 1);
};

/// b(x) = diag(x).
struct SmoothIdentity
{
  int dim = 1;
};

/// b(x) = exp(−|x − center|² / (2 width²)) · I.
struct SmoothGaussianBump
{
  Eigen::VectorXd center = Eigen::VectorXd::Zero(1);
  double width = 1.0;
};

class FieldSpec;

/// Convolution of `inner` with the ε-mollifier.
struct Mollified
{
  std::shared_ptr<const FieldSpec> inner;
  double epsilon = 0.0;
};

using FieldVariant = std::variant<PowerLaw, FourierSeries, SmoothConstant, SmoothIdentity, SmoothGaussianBump, Mollified>;

/// Immutable description of a coefficient b: R^d → R^{d×m}.
class FieldSpec
{
public:
  FieldSpec(PowerLaw v);
  FieldSpec(FourierSeries v);
  FieldSpec(SmoothConstant v);
  FieldSpec(SmoothIdentity v);
  FieldSpec(SmoothGaussianBump v);
  FieldSpec(Mollified v);

  const FieldVariant &variant() const { return *variant_; }

  int dim() const;      ///< d
  int noise_dim() const; ///< m

  /// False for an unmollified FourierSeries with regularity_alpha ≤ 0: such a
  /// coefficient is a distribution and may only be evaluated after mollification.
  bool pointwise() const;

  /// Precomputed modal coefficients (FourierSeries only, else empty).
  struct Modes
  {
    // rows: (output coordinate, axis) pairs; cols: k = 1..K
    Eigen::MatrixXd cos_coef;
    Eigen::MatrixXd sin_coef;
    Eigen::VectorXd frequency; // πk/L
  };
  const Modes &modes() const { return *modes_; }
  bool has_modes() const { return modes_ != nullptr; }

private:
  std::shared_ptr<const FieldVariant> variant_;
  std::shared_ptr<const Modes> modes_;
};

FieldSpec make_constant(double c);
FieldSpec make_identity(int dim = 1);
FieldSpec make_bump(double center, double width);

/// b evaluated at x: a d×m matrix.
Eigen::MatrixXd eval_field(const FieldSpec &spec, const Eigen::Ref<const Eigen::VectorXd> &x);

/// Convenience for d = m = 1.
double eval_scalar(const FieldSpec &spec, double x);

/// Wraps `spec` in a convolution with the normalized bump (1 − |u/ε|²)^4 on B_ε.
FieldSpec mollify(const FieldSpec &spec, double epsilon);

/// ∂b/∂x_k for k = 0..d−1, each a d×m matrix.
using FieldGradient = std::vector<Eigen::MatrixXd>;

/// Throws std::domain_error for variants or points where b is not differentiable
/// (PowerLaw at a zero coordinate, distributional FourierSeries).
FieldGradient eval_gradient(const FieldSpec &spec, const Eigen::Ref<const Eigen::VectorXd> &x);

/// Gauss–Legendre nodes and weights on [−1, 1].
struct GaussRule
{
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussRule gauss_legendre(int n);

/// Mollifier quadrature order per dimension.
inline constexpr int kMollifierOrder = 33;

/// Field serialization: JSON object with a `variant` discriminator.
std::string field_to_json(const FieldSpec &spec);
FieldSpec field_from_json(const std::string &text);

} // namespace yr
