#pragma once

#include "yr/fields.hpp"
#include "yr/paths.hpp"
#include "yr/stats.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace yr {

/// Uniform nodes over [−R, R]^d, n_cells + 1 per axis, axis 0 fastest.
struct SpaceGrid
{
  int dim = 1;
  double half_width = 1.0;
  int n_cells = 2;

  SpaceGrid() = default;
  SpaceGrid(int dim_, double half_width_, int n_cells_);

  int nodes_per_axis() const { return n_cells + 1; }
  int n_nodes() const { return dim == 1 ? nodes_per_axis() : nodes_per_axis() * nodes_per_axis(); }
  double dx() const { return 2.0 * half_width / n_cells; }
  double coord(int index) const { return -half_width + dx() * index; }
  Eigen::VectorXd node(int flat) const;
  bool contains(const Eigen::Ref<const Eigen::VectorXd> &x) const;

  friend bool operator==(const SpaceGrid &a, const SpaceGrid &b) {
    return a.dim == b.dim && a.half_width == b.half_width && a.n_cells == b.n_cells;
  }
};

enum class Interpolation { linear, cubic };
enum class FieldKind { classical, multiplicative, combined };

const char *to_string(Interpolation i);
const char *to_string(FieldKind k);

/// Node indices and weights reconstructing a value (or a derivative) at x.
struct Stencil
{
  std::array<int, 16> index{};
  std::array<double, 16> weight{};
  int size = 0;
};

/// Cumulative space-time field A(t_i, x_j) with A(0, ·) = 0. Increments
/// A_{s,t} = A(t) − A(s) are formed on demand, so they telescope exactly.
class AveragedField
{
public:
  /// values: (n_steps+1) × (n_nodes·out_dim); column j·out_dim + c holds component c at node j.
  AveragedField(TimeGrid time, SpaceGrid space, int out_dim, Eigen::MatrixXd values, FieldKind kind,
                Interpolation interp = Interpolation::cubic);

  const TimeGrid &time_grid() const { return time_; }
  const SpaceGrid &space_grid() const { return space_; }
  int out_dim() const { return out_dim_; }
  FieldKind kind() const { return kind_; }
  Interpolation interpolation() const { return interp_; }
  const Eigen::MatrixXd &values() const { return values_; }

  AveragedField with_interpolation(Interpolation interp) const;

  Eigen::VectorXd at_node(int time_index, int node) const {
    return values_.row(time_index).segment(static_cast<Eigen::Index>(node) * out_dim_, out_dim_).transpose();
  }

  bool contains(const Eigen::Ref<const Eigen::VectorXd> &x) const { return space_.contains(x); }

  /// A(t_i, x); outside the box the nearest boundary value is used.
  Eigen::VectorXd eval(int time_index, const Eigen::Ref<const Eigen::VectorXd> &x) const;

  /// A_{t_i, t_j}(x).
  Eigen::VectorXd increment(int i, int j, const Eigen::Ref<const Eigen::VectorXd> &x) const;

  /// A(t, x) for arbitrary t, linear in time between nodes.
  Eigen::VectorXd eval_at(double t, const Eigen::Ref<const Eigen::VectorXd> &x) const;

  /// A_{s,t}(x) for arbitrary s ≤ t, with A linear in time between nodes.
  Eigen::VectorXd increment_at(double s, double t, const Eigen::Ref<const Eigen::VectorXd> &x) const;

  /// Spatial Jacobian ∂A_{t_i,t_j}/∂x of the interpolant (out_dim × dim).
  Eigen::MatrixXd increment_jacobian(int i, int j, const Eigen::Ref<const Eigen::VectorXd> &x) const;

  /// Provenance and warnings attached by the producer.
  std::vector<std::string> flags;

private:
  Stencil stencil(const Eigen::Ref<const Eigen::VectorXd> &x, int derivative_axis) const;
  Eigen::VectorXd apply(const Stencil &s, int i, int j) const;

  TimeGrid time_;
  SpaceGrid space_;
  int out_dim_;
  Eigen::MatrixXd values_;
  FieldKind kind_;
  Interpolation interp_;
};

/// Builds a field by sampling f(t, x_j) on every node (tests and closed forms).
template <typename F>
AveragedField tabulate_field(const TimeGrid &time, const SpaceGrid &space, int out_dim, F &&f,
                             FieldKind kind = FieldKind::classical, Interpolation interp = Interpolation::cubic) {
  Eigen::MatrixXd v(time.n_nodes(), static_cast<Eigen::Index>(space.n_nodes()) * out_dim);
  for (int i = 0; i < time.n_nodes(); ++i) {
    for (int j = 0; j < space.n_nodes(); ++j) {
      const Eigen::VectorXd val = f(time.node(i), space.node(j));
      v.row(i).segment(static_cast<Eigen::Index>(j) * out_dim, out_dim) = val.transpose();
    }
  }
  v.row(0) -= Eigen::RowVectorXd(v.row(0));
  return AveragedField(time, space, out_dim, std::move(v), kind, interp);
}

// ---------------------------------------------------------------------------

/// T^w_t b(x) = ∫_0^t b(x + w_s) ds by composite trapezoid on w's grid.
AveragedField compute_T(const FieldSpec &b, const SampledPath &w, const SpaceGrid &space,
                        Interpolation interp = Interpolation::cubic);

/// Time spent by w in each spatial bin up to t_i (d = 1), with w linear between nodes.
struct OccupationMeasure
{
  TimeGrid time;
  SpaceGrid space;
  Eigen::MatrixXd mass;  ///< (n_steps+1) × n_cells, cumulative
  Eigen::VectorXd below; ///< cumulative mass left of −R
  Eigen::VectorXd above; ///< cumulative mass right of R

  double total(int time_index) const {
    return mass.row(time_index).sum() + below[time_index] + above[time_index];
  }
  double overflow() const { return below[below.size() - 1] + above[above.size() - 1]; }
  double bin_center(int k) const { return space.coord(k) + 0.5 * space.dx(); }
};

OccupationMeasure compute_occupation(const SampledPath &w, const SpaceGrid &space);

/// T^w b(x) = (b ∗ μ̄)(x) = Σ_k b(x + c_k) μ(bin k); bins are the space grid cells.
AveragedField compute_T_via_occupation(const FieldSpec &b, const OccupationMeasure &occ,
                                       Interpolation interp = Interpolation::cubic,
                                       double overflow_tolerance = 1e-12);

/// Γ^w_t b(x) = Σ_{k<i} b(x + w_{t_k}) β_{t_k, t_{k+1}}: the first-order sewing sum.
AveragedField compute_Gamma(const FieldSpec &b, const SampledPath &w, const SampledPath &beta, const SpaceGrid &space,
                            Interpolation interp = Interpolation::cubic);

/// Same sum with ∂_axis b in place of b (for the differentiation/averaging commutation check).
AveragedField compute_Gamma_gradient(const FieldSpec &b, int axis, const SampledPath &w, const SampledPath &beta,
                                     const SpaceGrid &space, Interpolation interp = Interpolation::cubic);

/// A = T^w b_1 + Γ^w b_2.
AveragedField combine_drift_diffusion(const AveragedField &drift, const AveragedField &diffusion);

AveragedField operator+(const AveragedField &a, const AveragedField &b);
AveragedField operator-(const AveragedField &a, const AveragedField &b);
AveragedField operator*(double s, const AveragedField &a);

// ---------------------------------------------------------------------------

struct FieldHolderEstimate
{
  double gamma = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
  std::vector<double> radii;
  std::vector<double> seminorm; ///< ⟦A⟧_{γ,η,R} per radius
  std::vector<double> norm;     ///< ‖A‖_{γ,η,R} per radius
  double base = 0.0;            ///< sup |A_{s,t}(0)| / |t−s|^γ
  double weighted = 0.0;        ///< base + sup_R R^{−λ} ⟦A⟧_{γ,η,R}
  double time_exponent = 0.0;   ///< log-log slope of sup_{s, x∈B_Rmax} |A_{s,s+h}(x)| in h
  double time_exponent_r2 = 0.0;
};

/// R ∈ {1, 2, 4, 8} ∩ (0, half_width]; the half width itself if that is empty.
std::vector<double> default_radii(const SpaceGrid &space);

/// Dyadic time pairs × dyadic axis-aligned node pairs.
FieldHolderEstimate estimate_field_holder(const AveragedField &a, double gamma, double eta, double lambda,
                                          std::vector<double> radii = {});

struct MomentExponent
{
  Eigen::VectorXd scales;   ///< |t − s|
  Eigen::VectorXd lp_norms; ///< ‖Γ_{s,t} b(x)‖_{L^p}
  double slope = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  double band_low = 0.0;  ///< slope − 2·stderr
  double band_high = 0.0; ///< slope + 2·stderr
  int n_samples = 0;
};

/// Monte-Carlo L^p norms of Γ_{0,h} b(x) over h = T·2^{-k}, β resampled per
/// sample from derive_seed(fbm.seed, beta, j); w stays fixed.
MomentExponent mc_moment_exponent(const FieldSpec &b, const SampledPath &w, const FbmSpec &fbm,
                                  const Eigen::Ref<const Eigen::VectorXd> &x, double p, int n_samples,
                                  int n_scales = 8);

struct CommutationReport
{
  double derivative_discrepancy = 0.0;  ///< max |∂_x Γ^w b − Γ^w ∂b| over interior nodes
  double convolution_discrepancy = 0.0; ///< max |K∗Γ^w b − Γ^w (K∗b)| over interior nodes
  std::vector<double> epsilons;
  std::vector<double> mollified_norm_ratio; ///< ‖Γ^w b^ε‖ / ‖Γ^w b‖ per ε
  double max_norm_ratio = 0.0;
};

/// d = 1 only. Derivatives by central differences on the grid; K is the
/// mollifier of width `kernel_eps` applied to the gridded field through interpolation.
CommutationReport check_commutations(const FieldSpec &b, const SampledPath &w, const SampledPath &beta,
                                     const SpaceGrid &space, double kernel_eps,
                                     const std::vector<double> &norm_epsilons = {}, double gamma = 0.5,
                                     double eta = 0.5, double lambda = 0.5);

/// ‖Γ^{2^l N} − Γ^{2^{l-1} N}‖_∞ at shared nodes for l = 1..levels, from w and β on the finest grid.
struct GammaRefinement
{
  std::vector<double> deltas;
  LinearFit fit; ///< fit.slope = decay order in Δt
};

GammaRefinement gamma_refinement_study(const FieldSpec &b, const SampledPath &w_fine, const SampledPath &beta_fine,
                                       const SpaceGrid &space, int coarse_steps, int levels);

} // namespace yr
