#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace yr {

/// Uniform grid t_i = i·horizon/n_steps on [0, horizon].
struct TimeGrid
{
  double horizon = 1.0;
  int n_steps = 1;

  TimeGrid() = default;
  TimeGrid(double horizon_, int n_steps_) : horizon(horizon_), n_steps(n_steps_) {
    if (!(horizon > 0.0) || !std::isfinite(horizon) || n_steps < 1) {
      throw std::invalid_argument("TimeGrid: need horizon > 0 and n_steps >= 1");
    }
  }

  double dt() const { return horizon / n_steps; }
  double node(int i) const { return horizon * static_cast<double>(i) / n_steps; }
  int n_nodes() const { return n_steps + 1; }
  Eigen::VectorXd nodes() const { return Eigen::VectorXd::LinSpaced(n_nodes(), 0.0, horizon); }

  /// Grid with 2^level times as many steps over the same horizon.
  TimeGrid refined(int level) const { return TimeGrid(horizon, n_steps << level); }

  friend bool operator==(const TimeGrid &a, const TimeGrid &b) {
    return a.horizon == b.horizon && a.n_steps == b.n_steps;
  }
};

/// A d-dimensional path sampled on a TimeGrid; row i holds the value at t_i.
struct SampledPath
{
  TimeGrid grid;
  Eigen::MatrixXd values;

  SampledPath() = default;
  SampledPath(TimeGrid grid_, Eigen::MatrixXd values_);

  static SampledPath zero(const TimeGrid &grid, int dim) {
    return SampledPath(grid, Eigen::MatrixXd::Zero(grid.n_nodes(), dim));
  }

  int dim() const { return static_cast<int>(values.cols()); }
  int n_nodes() const { return static_cast<int>(values.rows()); }
  Eigen::VectorXd at(int i) const { return values.row(i).transpose(); }

  /// f_{s,t} := f(t) − f(s) between nodes i and j.
  Eigen::VectorXd increment(int i, int j) const { return (values.row(j) - values.row(i)).transpose(); }

  /// Keeps every 2^level-th node; the result lives on a coarser grid.
  SampledPath subsampled(int level) const;

  double sup_norm() const;
};

SampledPath add_paths(const SampledPath &a, const SampledPath &b);
SampledPath sub_paths(const SampledPath &a, const SampledPath &b);

/// Sup over nodes of the Euclidean distance |a_t − b_t|.
double sup_distance(const SampledPath &a, const SampledPath &b);

// ---------------------------------------------------------------------------
// Fractional Brownian motion

struct FbmSpec
{
  double hurst = 0.5;
  int dim = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class FbmMethod {
  automatic,
  circulant, ///< Davies–Harte circulant embedding, O(N log N)
  cholesky,  ///< dense factorization of the increment covariance, O(N^3)
  linear,    ///< degenerate hurst ≥ 0.999 convention β_t = N·t
};

const char *to_string(FbmMethod m);

/// Hurst parameters at or above this value use β_t = N·t.
inline constexpr double kDegenerateHurst = 0.999;

/// Precomputed factorization for repeated sampling at fixed (hurst, grid).
class FbmGenerator
{
public:
  FbmGenerator(double hurst, const TimeGrid &grid, FbmMethod requested = FbmMethod::automatic);

  /// One scalar fBm path (n_nodes values, starting at 0) from a given stream seed.
  Eigen::VectorXd sample_scalar(std::uint64_t stream_seed) const;

  /// d independent coordinates; coordinate k uses stream derive_seed(seed, path, k).
  SampledPath sample(std::uint64_t seed, int dim) const;

  FbmMethod method() const { return method_; }
  /// True when circulant embedding was requested but had negative eigenvalues.
  bool fell_back() const { return fell_back_; }
  const TimeGrid &grid() const { return grid_; }
  double hurst() const { return hurst_; }

private:
  double hurst_;
  TimeGrid grid_;
  FbmMethod method_;
  bool fell_back_ = false;
  Eigen::VectorXd sqrt_eigenvalues_; // circulant
  Eigen::MatrixXd lower_;            // cholesky
};

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
double fgn_autocovariance(double hurst, int lag);

/// Cov(β_s, β_t) = ½(s^{2H} + t^{2H} − |t−s|^{2H}).
double fbm_covariance(double hurst, double s, double t);

struct FbmDraw
{
  SampledPath path;
  FbmMethod method;
};

FbmDraw gen_fbm_traced(const FbmSpec &spec, const TimeGrid &grid, FbmMethod strategy = FbmMethod::automatic);

inline SampledPath gen_fbm(const FbmSpec &spec, const TimeGrid &grid, FbmMethod strategy = FbmMethod::automatic) {
  return gen_fbm_traced(spec, grid, strategy).path;
}

// ---------------------------------------------------------------------------
// Hölder seminorm estimation

enum class PairStrategy { dyadic, all, window };

struct HolderEstimate
{
  double exponent = 1.0;
  double seminorm = 0.0;
  long long pair_budget = 0;
};

/// Lower bound for sup |f_t − f_s| / |t − s|^exponent over rows of `values`
/// spaced `step` apart in time (or space). Pair sets:
///   dyadic: (i, i + 2^k) for all k;  all: every i < j;  window: j − i ≤ window.
template <typename Derived>
HolderEstimate holder_seminorm_rows(const Eigen::MatrixBase<Derived> &values, double step, double exponent,
                                    PairStrategy strategy = PairStrategy::dyadic, int window = 32) {
  if (!(exponent > 0.0 && exponent <= 1.0)) {
    throw std::invalid_argument("holder_seminorm: exponent must lie in (0, 1]");
  }
  HolderEstimate est;
  est.exponent = exponent;
  const Eigen::Index n = values.rows();
  auto visit = [&](Eigen::Index i, Eigen::Index j) {
    const double num = (values.row(j) - values.row(i)).norm();
    const double den = std::pow(static_cast<double>(j - i) * step, exponent);
    est.seminorm = std::max(est.seminorm, num / den);
    ++est.pair_budget;
  };
  switch (strategy) {
  case PairStrategy::dyadic:
    for (Eigen::Index gap = 1; gap < n; gap *= 2) {
      for (Eigen::Index i = 0; i + gap < n; ++i) {
        visit(i, i + gap);
      }
    }
    break;
  case PairStrategy::all:
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        visit(i, j);
      }
    }
    break;
  case PairStrategy::window:
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n && j - i <= window; ++j) {
        visit(i, j);
      }
    }
    break;
  }
  return est;
}

HolderEstimate holder_seminorm(const SampledPath &path, double exponent,
                               PairStrategy strategy = PairStrategy::dyadic, int window = 32);

/// ‖f‖_γ = sup|f| + ⟦f⟧_γ.
double holder_norm(const SampledPath &path, double exponent, PairStrategy strategy = PairStrategy::dyadic);

// ---------------------------------------------------------------------------
// CSV: header `t,x_1,...,x_d`, 17 significant digits.

void write_path_csv(std::ostream &os, const SampledPath &path);
SampledPath read_path_csv(std::istream &is);

/// Shortest round-trip-safe text for a double (17 significant digits).
std::string format_double(double v);

} // namespace yr
