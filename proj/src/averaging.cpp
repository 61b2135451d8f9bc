#include "yr/averaging.hpp"

#include "yr/parallel.hpp"
#include "yr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace yr {

SpaceGrid::SpaceGrid(int dim_, double half_width_, int n_cells_)
    : dim(dim_), half_width(half_width_), n_cells(n_cells_) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("SpaceGrid: dim must be 1 or 2");
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("SpaceGrid: half_width must be positive");
  }
  if (n_cells < 2) {
    throw std::invalid_argument("SpaceGrid: need n_cells >= 2");
  }
}

Eigen::VectorXd SpaceGrid::node(int flat) const {
  Eigen::VectorXd x(dim);
  if (dim == 1) {
    x[0] = coord(flat);
  } else {
    x[0] = coord(flat % nodes_per_axis());
    x[1] = coord(flat / nodes_per_axis());
  }
  return x;
}

bool SpaceGrid::contains(const Eigen::Ref<const Eigen::VectorXd> &x) const {
  const double tol = half_width * (1.0 + 1e-12);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!(std::abs(x[k]) <= tol)) {
      return false;
    }
  }
  return true;
}

const char *to_string(Interpolation i) {
  return i == Interpolation::linear ? "linear" : "cubic";
}

const char *to_string(FieldKind k) {
  switch (k) {
  case FieldKind::classical:
    return "classical";
  case FieldKind::multiplicative:
    return "multiplicative";
  case FieldKind::combined:
    return "combined";
  }
  return "unknown";
}

namespace {

struct AxisWeights
{
  int index[4] = {0, 0, 0, 0};
  double weight[4] = {0, 0, 0, 0};
  int size = 0;
};

// Catmull-Rom on the cell containing x. Missing outer neighbours are linear
// ghosts (f_{-1} = 2 f_0 − f_1), folded back into the boundary weights so
// affine data is reproduced exactly up to the boundary.
AxisWeights axis_weights(double x, const SpaceGrid &g, Interpolation interp, bool derivative) {
  AxisWeights a;
  const int n = g.n_cells;
  const double u_raw = (x + g.half_width) / g.dx();
  const bool outside = u_raw < 0.0 || u_raw > n;
  const double u = std::clamp(u_raw, 0.0, static_cast<double>(n));
  const int k = std::min(static_cast<int>(std::floor(u)), n - 1);
  const double s = u - k;
  if (derivative && outside) {
    return a;
  }
  auto push = [&](int idx, double w) {
    for (int q = 0; q < a.size; ++q) {
      if (a.index[q] == idx) {
        a.weight[q] += w;
        return;
      }
    }
    a.index[a.size] = idx;
    a.weight[a.size] = w;
    ++a.size;
  };
  if (interp == Interpolation::linear) {
    if (derivative) {
      push(k, -1.0 / g.dx());
      push(k + 1, 1.0 / g.dx());
    } else {
      push(k, 1.0 - s);
      push(k + 1, s);
    }
    return a;
  }
  double w[4];
  if (derivative) {
    const double inv = 1.0 / g.dx();
    w[0] = 0.5 * (-3.0 * s * s + 4.0 * s - 1.0) * inv;
    w[1] = 0.5 * (9.0 * s * s - 10.0 * s) * inv;
    w[2] = 0.5 * (-9.0 * s * s + 8.0 * s + 1.0) * inv;
    w[3] = 0.5 * (3.0 * s * s - 2.0 * s) * inv;
  } else {
    const double s2 = s * s, s3 = s2 * s;
    w[0] = 0.5 * (-s3 + 2.0 * s2 - s);
    w[1] = 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0);
    w[2] = 0.5 * (-3.0 * s3 + 4.0 * s2 + s);
    w[3] = 0.5 * (s3 - s2);
  }
  if (k - 1 < 0) {
    push(k, 2.0 * w[0]);
    push(k + 1, -w[0]);
  } else {
    push(k - 1, w[0]);
  }
  push(k, w[1]);
  push(k + 1, w[2]);
  if (k + 2 > n) {
    push(k + 1, 2.0 * w[3]);
    push(k, -w[3]);
  } else {
    push(k + 2, w[3]);
  }
  return a;
}

void require_same_grid(const SampledPath &a, const SampledPath &b, const char *what) {
  if (!(a.grid == b.grid)) {
    throw std::invalid_argument(std::string(what) + ": paths live on different time grids");
  }
}

void require_pointwise(const FieldSpec &b, const char *what) {
  if (!b.pointwise()) {
    throw std::invalid_argument(std::string(what) +
                                ": coefficient is distributional (regularity_alpha <= 0); mollify it first");
  }
}

// Γ-type sum Σ_{k<i} F(x_j + w_k) β_{t_k,t_{k+1}} for an arbitrary d×m integrand F.
AveragedField sewing_sum(const std::function<Eigen::MatrixXd(const Eigen::VectorXd &)> &integrand, int out_dim,
                         const SampledPath &w, const SampledPath &beta, const SpaceGrid &space, Interpolation interp) {
  const TimeGrid &tg = w.grid;
  const int n_nodes = space.n_nodes();
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(tg.n_nodes(), static_cast<Eigen::Index>(n_nodes) * out_dim);
  const Eigen::MatrixXd dbeta = beta.values.bottomRows(tg.n_steps) - beta.values.topRows(tg.n_steps);
  parallel_for(static_cast<std::size_t>(n_nodes), [&](std::size_t j) {
    const Eigen::VectorXd x = space.node(static_cast<int>(j));
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(out_dim);
    for (int k = 0; k < tg.n_steps; ++k) {
      const Eigen::VectorXd y = x + w.values.row(k).transpose();
      acc += integrand(y) * dbeta.row(k).transpose();
      values.block(k + 1, static_cast<Eigen::Index>(j) * out_dim, 1, out_dim) = acc.transpose();
    }
  });
  return AveragedField(tg, space, out_dim, std::move(values), FieldKind::multiplicative, interp);
}

} // namespace

AveragedField::AveragedField(TimeGrid time, SpaceGrid space, int out_dim, Eigen::MatrixXd values, FieldKind kind,
                             Interpolation interp)
    : time_(time), space_(space), out_dim_(out_dim), values_(std::move(values)), kind_(kind), interp_(interp) {
  if (out_dim_ < 1) {
    throw std::invalid_argument("AveragedField: out_dim must be positive");
  }
  if (values_.rows() != time_.n_nodes() ||
      values_.cols() != static_cast<Eigen::Index>(space_.n_nodes()) * out_dim_) {
    throw std::invalid_argument("AveragedField: values shape does not match the grids");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("AveragedField: values must be finite");
  }
  if (!values_.row(0).isZero(0.0)) {
    throw std::invalid_argument("AveragedField: A(0, .) must vanish");
  }
}

AveragedField AveragedField::with_interpolation(Interpolation interp) const {
  AveragedField copy = *this;
  copy.interp_ = interp;
  return copy;
}

Stencil AveragedField::stencil(const Eigen::Ref<const Eigen::VectorXd> &x, int derivative_axis) const {
  if (x.size() != space_.dim) {
    throw std::invalid_argument("AveragedField: point dimension does not match the space grid");
  }
  Stencil st;
  if (space_.dim == 1) {
    const AxisWeights a = axis_weights(x[0], space_, interp_, derivative_axis == 0);
    for (int q = 0; q < a.size; ++q) {
      st.index[static_cast<std::size_t>(st.size)] = a.index[q];
      st.weight[static_cast<std::size_t>(st.size)] = a.weight[q];
      ++st.size;
    }
    return st;
  }
  const AxisWeights a0 = axis_weights(x[0], space_, interp_, derivative_axis == 0);
  const AxisWeights a1 = axis_weights(x[1], space_, interp_, derivative_axis == 1);
  const int np = space_.nodes_per_axis();
  for (int q1 = 0; q1 < a1.size; ++q1) {
    for (int q0 = 0; q0 < a0.size; ++q0) {
      st.index[static_cast<std::size_t>(st.size)] = a0.index[q0] + np * a1.index[q1];
      st.weight[static_cast<std::size_t>(st.size)] = a0.weight[q0] * a1.weight[q1];
      ++st.size;
    }
  }
  return st;
}

Eigen::VectorXd AveragedField::apply(const Stencil &s, int i, int j) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_dim_);
  for (int q = 0; q < s.size; ++q) {
    const Eigen::Index col = static_cast<Eigen::Index>(s.index[static_cast<std::size_t>(q)]) * out_dim_;
    out += s.weight[static_cast<std::size_t>(q)] *
           (values_.row(j).segment(col, out_dim_) - values_.row(i).segment(col, out_dim_)).transpose();
  }
  return out;
}

Eigen::VectorXd AveragedField::eval(int time_index, const Eigen::Ref<const Eigen::VectorXd> &x) const {
  return apply(stencil(x, -1), 0, time_index);
}

Eigen::VectorXd AveragedField::increment(int i, int j, const Eigen::Ref<const Eigen::VectorXd> &x) const {
  return apply(stencil(x, -1), i, j);
}

namespace {

struct TimeWeight
{
  int index;
  double lambda;
};

TimeWeight locate(const TimeGrid &g, double t) {
  const double u = std::clamp(t / g.dt(), 0.0, static_cast<double>(g.n_steps));
  const double r = std::round(u);
  if (std::abs(u - r) <= 1e-9) {
    return {static_cast<int>(r), 0.0};
  }
  const int i = std::min(static_cast<int>(std::floor(u)), g.n_steps - 1);
  return {i, u - i};
}

} // namespace

Eigen::VectorXd AveragedField::eval_at(double t, const Eigen::Ref<const Eigen::VectorXd> &x) const {
  return increment_at(0.0, t, x);
}

Eigen::VectorXd AveragedField::increment_at(double s, double t, const Eigen::Ref<const Eigen::VectorXd> &x) const {
  const Stencil st = stencil(x, -1);
  const TimeWeight a = locate(time_, s);
  const TimeWeight b = locate(time_, t);
  Eigen::VectorXd out = apply(st, a.index, b.index);
  if (a.lambda != 0.0) {
    out -= a.lambda * apply(st, a.index, a.index + 1);
  }
  if (b.lambda != 0.0) {
    out += b.lambda * apply(st, b.index, b.index + 1);
  }
  return out;
}

Eigen::MatrixXd AveragedField::increment_jacobian(int i, int j, const Eigen::Ref<const Eigen::VectorXd> &x) const {
  Eigen::MatrixXd jac(out_dim_, space_.dim);
  for (int k = 0; k < space_.dim; ++k) {
    jac.col(k) = apply(stencil(x, k), i, j);
  }
  return jac;
}

// ---------------------------------------------------------------------------

AveragedField compute_T(const FieldSpec &b, const SampledPath &w, const SpaceGrid &space, Interpolation interp) {
  require_pointwise(b, "compute_T");
  if (b.dim() != w.dim() || b.dim() != space.dim) {
    throw std::invalid_argument("compute_T: dimensions of b, w and the space grid differ");
  }
  if (b.noise_dim() != 1) {
    throw std::invalid_argument("compute_T: drift coefficient must be d x 1");
  }
  const TimeGrid &tg = w.grid;
  const int d = b.dim();
  const int n_nodes = space.n_nodes();
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(tg.n_nodes(), static_cast<Eigen::Index>(n_nodes) * d);
  const double half_dt = 0.5 * tg.dt();
  parallel_for(static_cast<std::size_t>(n_nodes), [&](std::size_t j) {
    const Eigen::VectorXd x = space.node(static_cast<int>(j));
    Eigen::VectorXd prev = eval_field(b, x + w.values.row(0).transpose()).col(0);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    for (int k = 1; k <= tg.n_steps; ++k) {
      const Eigen::VectorXd cur = eval_field(b, x + w.values.row(k).transpose()).col(0);
      acc += half_dt * (prev + cur);
      values.block(k, static_cast<Eigen::Index>(j) * d, 1, d) = acc.transpose();
      prev = cur;
    }
  });
  return AveragedField(tg, space, d, std::move(values), FieldKind::classical, interp);
}

OccupationMeasure compute_occupation(const SampledPath &w, const SpaceGrid &space) {
  if (space.dim != 1 || w.dim() != 1) {
    throw std::invalid_argument("compute_occupation: only d = 1 is supported");
  }
  const TimeGrid &tg = w.grid;
  const int n = space.n_cells;
  const double R = space.half_width;
  const double dx = space.dx();
  OccupationMeasure occ{tg, space, Eigen::MatrixXd::Zero(tg.n_nodes(), n), Eigen::VectorXd::Zero(tg.n_nodes()),
                        Eigen::VectorXd::Zero(tg.n_nodes())};
  auto edge = [&](int k) { return k == n ? R : -R + dx * k; };
  auto bin_of = [&](double y) { return std::clamp(static_cast<int>(std::floor((y + R) / dx)), 0, n - 1); };
  const double dt = tg.dt();
  for (int i = 1; i <= tg.n_steps; ++i) {
    occ.mass.row(i) = occ.mass.row(i - 1);
    occ.below[i] = occ.below[i - 1];
    occ.above[i] = occ.above[i - 1];
    const double a = w.values(i - 1, 0);
    const double b = w.values(i, 0);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (hi - lo <= 1e-15 * (1.0 + std::abs(lo))) {
      if (a < -R) {
        occ.below[i] += dt;
      } else if (a > R) {
        occ.above[i] += dt;
      } else {
        occ.mass(i, bin_of(a)) += dt;
      }
      continue;
    }
    const double density = dt / (hi - lo);
    if (lo < -R) {
      occ.below[i] += density * (std::min(hi, -R) - lo);
    }
    if (hi > R) {
      occ.above[i] += density * (hi - std::max(lo, R));
    }
    const double clo = std::max(lo, -R), chi = std::min(hi, R);
    if (chi <= clo) {
      continue;
    }
    for (int k = bin_of(clo); k <= bin_of(chi); ++k) {
      const double overlap = std::min(chi, edge(k + 1)) - std::max(clo, edge(k));
      if (overlap > 0.0) {
        occ.mass(i, k) += density * overlap;
      }
    }
  }
  return occ;
}

AveragedField compute_T_via_occupation(const FieldSpec &b, const OccupationMeasure &occ, Interpolation interp,
                                       double overflow_tolerance) {
  require_pointwise(b, "compute_T_via_occupation");
  if (b.dim() != 1 || b.noise_dim() != 1 || occ.space.dim != 1) {
    throw std::invalid_argument("compute_T_via_occupation: only d = m = 1 is supported");
  }
  const SpaceGrid &space = occ.space;
  const int n = space.n_cells;
  const double dx = space.dx();
  // x_j + c_k = −2R + (j + k + ½)Δx, so b is needed on 2n lattice points only.
  Eigen::VectorXd lattice(2 * n);
  for (int m = 0; m < 2 * n; ++m) {
    lattice[m] = eval_scalar(b, -2.0 * space.half_width + (m + 0.5) * dx);
  }
  // Each step only adds mass to the bins its segment crosses.
  const int n_times = occ.time.n_nodes();
  std::vector<int> first(static_cast<std::size_t>(n_times), 0), last(static_cast<std::size_t>(n_times), -1);
  for (int i = 1; i < n_times; ++i) {
    for (int k = 0; k < n; ++k) {
      if (occ.mass(i, k) != occ.mass(i - 1, k)) {
        if (last[static_cast<std::size_t>(i)] < 0) {
          first[static_cast<std::size_t>(i)] = k;
        }
        last[static_cast<std::size_t>(i)] = k;
      }
    }
  }
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n_times, space.n_nodes());
  parallel_for(static_cast<std::size_t>(space.n_nodes()), [&](std::size_t j) {
    double acc = 0.0;
    for (int i = 1; i < n_times; ++i) {
      const int k0 = first[static_cast<std::size_t>(i)];
      const int len = last[static_cast<std::size_t>(i)] - k0 + 1;
      if (len > 0) {
        acc += (occ.mass.row(i).segment(k0, len) - occ.mass.row(i - 1).segment(k0, len))
                   .dot(lattice.segment(static_cast<Eigen::Index>(j) + k0, len).transpose());
      }
      values(i, static_cast<Eigen::Index>(j)) = acc;
    }
  });
  AveragedField out(occ.time, space, 1, std::move(values), FieldKind::classical, interp);
  const double overflow = occ.overflow();
  if (overflow > overflow_tolerance) {
    out.flags.push_back("occupation_overflow:" + format_double(overflow));
  }
  return out;
}

AveragedField compute_Gamma(const FieldSpec &b, const SampledPath &w, const SampledPath &beta, const SpaceGrid &space,
                            Interpolation interp) {
  require_pointwise(b, "compute_Gamma");
  require_same_grid(w, beta, "compute_Gamma");
  if (b.dim() != w.dim() || b.dim() != space.dim) {
    throw std::invalid_argument("compute_Gamma: dimensions of b, w and the space grid differ");
  }
  if (b.noise_dim() != beta.dim()) {
    throw std::invalid_argument("compute_Gamma: b is d x " + std::to_string(b.noise_dim()) + " but beta has dim " +
                                std::to_string(beta.dim()));
  }
  return sewing_sum([&](const Eigen::VectorXd &y) { return eval_field(b, y); }, b.dim(), w, beta, space, interp);
}

AveragedField compute_Gamma_gradient(const FieldSpec &b, int axis, const SampledPath &w, const SampledPath &beta,
                                     const SpaceGrid &space, Interpolation interp) {
  require_same_grid(w, beta, "compute_Gamma_gradient");
  if (axis < 0 || axis >= b.dim()) {
    throw std::invalid_argument("compute_Gamma_gradient: axis out of range");
  }
  if (b.dim() != w.dim() || b.dim() != space.dim || b.noise_dim() != beta.dim()) {
    throw std::invalid_argument("compute_Gamma_gradient: dimension mismatch");
  }
  return sewing_sum([&](const Eigen::VectorXd &y) { return eval_gradient(b, y)[static_cast<std::size_t>(axis)]; },
                    b.dim(), w, beta, space, interp);
}

namespace {

void require_compatible(const AveragedField &a, const AveragedField &b, const char *what) {
  if (!(a.time_grid() == b.time_grid()) || !(a.space_grid() == b.space_grid()) || a.out_dim() != b.out_dim()) {
    throw std::invalid_argument(std::string(what) + ": fields live on different grids");
  }
}

AveragedField combine(const AveragedField &a, const AveragedField &b, double sign, FieldKind kind) {
  AveragedField out(a.time_grid(), a.space_grid(), a.out_dim(), a.values() + sign * b.values(), kind,
                    b.interpolation());
  out.flags = a.flags;
  out.flags.insert(out.flags.end(), b.flags.begin(), b.flags.end());
  return out;
}

} // namespace

AveragedField combine_drift_diffusion(const AveragedField &drift, const AveragedField &diffusion) {
  require_compatible(drift, diffusion, "combine_drift_diffusion");
  return combine(drift, diffusion, 1.0, FieldKind::combined);
}

AveragedField operator+(const AveragedField &a, const AveragedField &b) {
  require_compatible(a, b, "AveragedField +");
  return combine(a, b, 1.0, a.kind() == b.kind() ? a.kind() : FieldKind::combined);
}

AveragedField operator-(const AveragedField &a, const AveragedField &b) {
  require_compatible(a, b, "AveragedField -");
  return combine(a, b, -1.0, a.kind() == b.kind() ? a.kind() : FieldKind::combined);
}

AveragedField operator*(double s, const AveragedField &a) {
  AveragedField out(a.time_grid(), a.space_grid(), a.out_dim(), s * a.values(), a.kind(), a.interpolation());
  out.flags = a.flags;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> default_radii(const SpaceGrid &space) {
  std::vector<double> r;
  for (double R : {1.0, 2.0, 4.0, 8.0}) {
    if (R <= space.half_width * (1.0 + 1e-12)) {
      r.push_back(R);
    }
  }
  if (r.empty()) {
    r.push_back(space.half_width);
  }
  return r;
}

FieldHolderEstimate estimate_field_holder(const AveragedField &a, double gamma, double eta, double lambda,
                                          std::vector<double> radii) {
  if (radii.empty()) {
    radii = default_radii(a.space_grid());
  }
  std::sort(radii.begin(), radii.end());
  const SpaceGrid &space = a.space_grid();
  const TimeGrid &tg = a.time_grid();
  const int out = a.out_dim();
  const std::size_t n_r = radii.size();

  // Smallest radius index whose ball contains a node; n_r if none.
  std::vector<std::size_t> node_radius(static_cast<std::size_t>(space.n_nodes()));
  for (int j = 0; j < space.n_nodes(); ++j) {
    const double r = space.node(j).norm();
    std::size_t q = 0;
    while (q < n_r && r > radii[q] * (1.0 + 1e-12)) {
      ++q;
    }
    node_radius[static_cast<std::size_t>(j)] = q;
  }

  struct Pair
  {
    int j1, j2;
    double inv_dist;
    std::size_t radius;
  };
  std::vector<Pair> pairs;
  const int np = space.nodes_per_axis();
  for (int axis = 0; axis < space.dim; ++axis) {
    const int stride = axis == 0 ? 1 : np;
    for (int gap = 1; gap < np; gap *= 2) {
      for (int j = 0; j < space.n_nodes(); ++j) {
        const int along = axis == 0 ? j % np : j / np;
        if (along + gap >= np) {
          continue;
        }
        const int j2 = j + gap * stride;
        const std::size_t q = std::max(node_radius[static_cast<std::size_t>(j)], node_radius[static_cast<std::size_t>(j2)]);
        if (q < n_r) {
          pairs.push_back({j, j2, std::pow(gap * space.dx(), -eta), q});
        }
      }
    }
  }

  FieldHolderEstimate est;
  est.gamma = gamma;
  est.eta = eta;
  est.lambda = lambda;
  est.radii = radii;
  est.seminorm.assign(n_r, 0.0);
  est.norm.assign(n_r, 0.0);

  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(space.dim);
  std::vector<double> sq_sum_by_gap;
  std::vector<double> gaps;
  for (int g = 1; g <= tg.n_steps; g *= 2) {
    const double scale = std::pow(g * tg.dt(), -gamma);
    double sq_sum = 0.0;
    int count = 0;
    for (int i = 0; i + g <= tg.n_steps; ++i) {
      const Eigen::RowVectorXd inc = a.values().row(i + g) - a.values().row(i);
      std::vector<double> semi(n_r, 0.0), sup(n_r, 0.0);
      for (const Pair &p : pairs) {
        const double diff =
            (inc.segment(static_cast<Eigen::Index>(p.j1) * out, out) - inc.segment(static_cast<Eigen::Index>(p.j2) * out, out))
                .norm();
        semi[p.radius] = std::max(semi[p.radius], diff * p.inv_dist);
      }
      for (int j = 0; j < space.n_nodes(); ++j) {
        const std::size_t q = node_radius[static_cast<std::size_t>(j)];
        if (q < n_r) {
          sup[q] = std::max(sup[q], inc.segment(static_cast<Eigen::Index>(j) * out, out).norm());
        }
      }
      for (std::size_t q = 1; q < n_r; ++q) {
        semi[q] = std::max(semi[q], semi[q - 1]);
        sup[q] = std::max(sup[q], sup[q - 1]);
      }
      const double at_origin = a.increment(i, i + g, origin).norm();
      double weighted = 0.0;
      for (std::size_t q = 0; q < n_r; ++q) {
        est.seminorm[q] = std::max(est.seminorm[q], semi[q] * scale);
        est.norm[q] = std::max(est.norm[q], (semi[q] + sup[q]) * scale);
        weighted = std::max(weighted, std::pow(radii[q], -lambda) * semi[q]);
      }
      est.base = std::max(est.base, at_origin * scale);
      est.weighted = std::max(est.weighted, (at_origin + weighted) * scale);
      sq_sum += sup[n_r - 1] * sup[n_r - 1];
      ++count;
    }
    gaps.push_back(g * tg.dt());
    sq_sum_by_gap.push_back(std::sqrt(sq_sum / count));
  }
  // RMS over s of sup_x |A_{s,s+h}(x)|; the max over s would carry a log(T/h) bias.
  std::vector<double> xs, ys;
  for (std::size_t q = 0; q < gaps.size(); ++q) {
    if (sq_sum_by_gap[q] > 0.0 && gaps[q] < tg.horizon) {
      xs.push_back(gaps[q]);
      ys.push_back(sq_sum_by_gap[q]);
    }
  }
  if (xs.size() >= 2) {
    const LinearFit fit = fit_loglog(Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
                                     Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())));
    est.time_exponent = fit.slope;
    est.time_exponent_r2 = fit.r2;
  }
  return est;
}

MomentExponent mc_moment_exponent(const FieldSpec &b, const SampledPath &w, const FbmSpec &fbm,
                                  const Eigen::Ref<const Eigen::VectorXd> &x, double p, int n_samples, int n_scales) {
  if (n_samples < 100) {
    throw std::invalid_argument("mc_moment_exponent: refusing fewer than 100 samples");
  }
  if (!(p >= 2.0)) {
    throw std::invalid_argument("mc_moment_exponent: need p >= 2");
  }
  require_pointwise(b, "mc_moment_exponent");
  fbm.validate();
  if (fbm.dim != b.noise_dim() || b.dim() != w.dim() || x.size() != b.dim()) {
    throw std::invalid_argument("mc_moment_exponent: dimension mismatch");
  }
  const TimeGrid &tg = w.grid;
  int max_scales = 0;
  while ((tg.n_steps >> max_scales) >= 1 && (tg.n_steps % (1 << max_scales)) == 0 && max_scales < 30) {
    ++max_scales;
  }
  n_scales = std::min(n_scales, max_scales);
  if (n_scales < 2) {
    throw std::invalid_argument("mc_moment_exponent: grid too coarse for two dyadic scales");
  }
  std::vector<Eigen::MatrixXd> integrand(static_cast<std::size_t>(tg.n_steps));
  for (int k = 0; k < tg.n_steps; ++k) {
    integrand[static_cast<std::size_t>(k)] = eval_field(b, x + w.values.row(k).transpose());
  }
  std::vector<int> stops(static_cast<std::size_t>(n_scales));
  for (int q = 0; q < n_scales; ++q) {
    stops[static_cast<std::size_t>(q)] = tg.n_steps >> q;
  }
  const FbmGenerator gen(fbm.hurst, tg);
  Eigen::MatrixXd moduli(n_samples, n_scales);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t s) {
    const SampledPath beta = gen.sample(derive_seed(fbm.seed, SeedLane::beta, s), fbm.dim);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(b.dim());
    int next = n_scales - 1;
    for (int k = 0; k < tg.n_steps && next >= 0; ++k) {
      acc += integrand[static_cast<std::size_t>(k)] * beta.increment(k, k + 1);
      while (next >= 0 && k + 1 == stops[static_cast<std::size_t>(next)]) {
        moduli(static_cast<Eigen::Index>(s), next) = acc.norm();
        --next;
      }
    }
  });
  MomentExponent m;
  m.n_samples = n_samples;
  m.scales.resize(n_scales);
  m.lp_norms.resize(n_scales);
  for (int q = 0; q < n_scales; ++q) {
    m.scales[q] = stops[static_cast<std::size_t>(q)] * tg.dt();
    m.lp_norms[q] = std::pow(moduli.col(q).array().pow(p).mean(), 1.0 / p);
  }
  const LinearFit fit = fit_loglog(m.scales, m.lp_norms);
  m.slope = fit.slope;
  m.r2 = fit.r2;
  m.slope_stderr = fit.slope_stderr;
  m.band_low = fit.slope - 2.0 * fit.slope_stderr;
  m.band_high = fit.slope + 2.0 * fit.slope_stderr;
  return m;
}

CommutationReport check_commutations(const FieldSpec &b, const SampledPath &w, const SampledPath &beta,
                                     const SpaceGrid &space, double kernel_eps,
                                     const std::vector<double> &norm_epsilons, double gamma, double eta,
                                     double lambda) {
  if (space.dim != 1 || b.dim() != 1) {
    throw std::invalid_argument("check_commutations: only d = 1 is supported");
  }
  if (!(kernel_eps > 0.0)) {
    throw std::invalid_argument("check_commutations: kernel_eps must be positive");
  }
  CommutationReport rep;
  const AveragedField gam = compute_Gamma(b, w, beta, space);
  const AveragedField dgam = compute_Gamma_gradient(b, 0, w, beta, space);
  const int out = gam.out_dim();
  const int n = space.n_cells;
  const double dx = space.dx();
  for (int i = 1; i < w.grid.n_nodes(); ++i) {
    for (int j = 1; j < n; ++j) {
      for (int c = 0; c < out; ++c) {
        const double fd = (gam.values()(i, (j + 1) * out + c) - gam.values()(i, (j - 1) * out + c)) / (2.0 * dx);
        rep.derivative_discrepancy =
            std::max(rep.derivative_discrepancy, std::abs(fd - dgam.values()(i, j * out + c)));
      }
    }
  }

  const AveragedField gam_eps = compute_Gamma(mollify(b, kernel_eps), w, beta, space);
  const GaussRule rule = gauss_legendre(kMollifierOrder);
  Eigen::VectorXd kw = rule.weights.array() * (1.0 - rule.nodes.array().square()).pow(4);
  kw /= kw.sum();
  for (int j = 0; j <= n; ++j) {
    const double xj = space.coord(j);
    if (std::abs(xj) + kernel_eps > space.half_width) {
      continue;
    }
    for (int i = 1; i < w.grid.n_nodes(); ++i) {
      Eigen::VectorXd conv = Eigen::VectorXd::Zero(out);
      for (Eigen::Index q = 0; q < kw.size(); ++q) {
        conv += kw[q] * gam.eval(i, Eigen::VectorXd::Constant(1, xj - kernel_eps * rule.nodes[q]));
      }
      rep.convolution_discrepancy =
          std::max(rep.convolution_discrepancy, (conv - gam_eps.at_node(i, j)).lpNorm<Eigen::Infinity>());
    }
  }

  if (!norm_epsilons.empty()) {
    const double reference = estimate_field_holder(gam, gamma, eta, lambda).weighted;
    for (double eps : norm_epsilons) {
      const double mollified =
          estimate_field_holder(compute_Gamma(mollify(b, eps), w, beta, space), gamma, eta, lambda).weighted;
      const double ratio = reference > 0.0 ? mollified / reference : (mollified > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      rep.epsilons.push_back(eps);
      rep.mollified_norm_ratio.push_back(ratio);
      rep.max_norm_ratio = std::max(rep.max_norm_ratio, ratio);
    }
  }
  return rep;
}

GammaRefinement gamma_refinement_study(const FieldSpec &b, const SampledPath &w_fine, const SampledPath &beta_fine,
                                       const SpaceGrid &space, int coarse_steps, int levels) {
  if (levels < 2) {
    throw std::invalid_argument("gamma_refinement_study: need at least two refinement levels");
  }
  if (w_fine.grid.n_steps != (coarse_steps << levels)) {
    throw std::invalid_argument("gamma_refinement_study: fine grid must have coarse_steps * 2^levels steps");
  }
  std::vector<AveragedField> fields;
  for (int l = 0; l <= levels; ++l) {
    fields.push_back(compute_Gamma(b, w_fine.subsampled(levels - l), beta_fine.subsampled(levels - l), space));
  }
  GammaRefinement out;
  for (int l = 1; l <= levels; ++l) {
    const Eigen::MatrixXd &coarse = fields[static_cast<std::size_t>(l - 1)].values();
    const Eigen::MatrixXd &fine = fields[static_cast<std::size_t>(l)].values();
    double delta = 0.0;
    for (Eigen::Index i = 0; i < coarse.rows(); ++i) {
      delta = std::max(delta, (fine.row(2 * i) - coarse.row(i)).lpNorm<Eigen::Infinity>());
    }
    out.deltas.push_back(delta);
  }
  out.fit = fit_refinement_rate(
      Eigen::Map<const Eigen::VectorXd>(out.deltas.data(), static_cast<Eigen::Index>(out.deltas.size())));
  return out;
}

} // namespace yr
