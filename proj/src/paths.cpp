#include "yr/paths.hpp"

#include "yr/rng.hpp"

#include <unsupported/Eigen/FFT>

#include <charconv>
#include <complex>
#include <istream>
#include <ostream>
#include <sstream>

namespace yr {

SampledPath::SampledPath(TimeGrid grid_, Eigen::MatrixXd values_) : grid(grid_), values(std::move(values_)) {
  if (values.rows() != grid.n_nodes()) {
    throw std::invalid_argument("SampledPath: row count must equal n_steps + 1");
  }
  if (values.cols() < 1) {
    throw std::invalid_argument("SampledPath: dim must be positive");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("SampledPath: values must be finite");
  }
}

SampledPath SampledPath::subsampled(int level) const {
  const int stride = 1 << level;
  if (grid.n_steps % stride != 0) {
    throw std::invalid_argument("subsampled: n_steps not divisible by 2^level");
  }
  const TimeGrid coarse(grid.horizon, grid.n_steps / stride);
  Eigen::MatrixXd v(coarse.n_nodes(), dim());
  for (int i = 0; i < coarse.n_nodes(); ++i) {
    v.row(i) = values.row(i * stride);
  }
  return SampledPath(coarse, std::move(v));
}

double SampledPath::sup_norm() const { return values.rowwise().norm().maxCoeff(); }

namespace {

void require_compatible(const SampledPath &a, const SampledPath &b, const char *what) {
  if (!(a.grid == b.grid) || a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(what) + ": grid or dimension mismatch");
  }
}

} // namespace

SampledPath add_paths(const SampledPath &a, const SampledPath &b) {
  require_compatible(a, b, "add_paths");
  return SampledPath(a.grid, a.values + b.values);
}

SampledPath sub_paths(const SampledPath &a, const SampledPath &b) {
  require_compatible(a, b, "sub_paths");
  return SampledPath(a.grid, a.values - b.values);
}

double sup_distance(const SampledPath &a, const SampledPath &b) {
  require_compatible(a, b, "sup_distance");
  return (a.values - b.values).rowwise().norm().maxCoeff();
}

// ---------------------------------------------------------------------------

void FbmSpec::validate() const {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw std::invalid_argument("FbmSpec: hurst must lie in (0, 1)");
  }
  if (dim < 1) {
    throw std::invalid_argument("FbmSpec: dim must be positive");
  }
}

const char *to_string(FbmMethod m) {
  switch (m) {
  case FbmMethod::automatic:
    return "automatic";
  case FbmMethod::circulant:
    return "circulant";
  case FbmMethod::cholesky:
    return "cholesky";
  case FbmMethod::linear:
    return "linear";
  }
  return "unknown";
}

double fgn_autocovariance(double hurst, int lag) {
  const double k = std::abs(static_cast<double>(lag));
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
}

double fbm_covariance(double hurst, double s, double t) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

FbmGenerator::FbmGenerator(double hurst, const TimeGrid &grid, FbmMethod requested)
    : hurst_(hurst), grid_(grid), method_(requested) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw std::invalid_argument("FbmGenerator: hurst must lie in (0, 1)");
  }
  const int n = grid.n_steps;
  if (method_ == FbmMethod::automatic) {
    method_ = hurst >= kDegenerateHurst ? FbmMethod::linear : FbmMethod::circulant;
  }
  if (method_ == FbmMethod::circulant) {
    const int m = 2 * n;
    std::vector<std::complex<double>> c(m), lambda;
    for (int k = 0; k <= n; ++k) {
      c[k] = fgn_autocovariance(hurst, k);
    }
    for (int k = 1; k < n; ++k) {
      c[m - k] = c[k];
    }
    Eigen::FFT<double> fft;
    fft.fwd(lambda, c);
    double lmax = 0.0, lmin = 0.0;
    for (const auto &l : lambda) {
      lmax = std::max(lmax, l.real());
      lmin = std::min(lmin, l.real());
    }
    if (lmin < -1e-10 * lmax) {
      method_ = FbmMethod::cholesky;
      fell_back_ = true;
    } else {
      sqrt_eigenvalues_.resize(m);
      for (int j = 0; j < m; ++j) {
        sqrt_eigenvalues_[j] = std::sqrt(std::max(0.0, lambda[j].real()) / m);
      }
    }
  }
  if (method_ == FbmMethod::cholesky) {
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cov(i, j) = fgn_autocovariance(hurst, i - j);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("FbmGenerator: increment covariance is not positive definite");
    }
    lower_ = llt.matrixL();
  }
}

Eigen::VectorXd FbmGenerator::sample_scalar(std::uint64_t stream_seed) const {
  const int n = grid_.n_steps;
  Engine engine(stream_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd path = Eigen::VectorXd::Zero(n + 1);

  if (method_ == FbmMethod::linear) {
    const double slope = normal(engine);
    for (int i = 0; i <= n; ++i) {
      path[i] = slope * grid_.node(i);
    }
    return path;
  }

  Eigen::VectorXd noise(n);
  if (method_ == FbmMethod::circulant) {
    const int m = 2 * n;
    std::vector<std::complex<double>> z(m), y;
    for (int j = 0; j < m; ++j) {
      const double a = normal(engine);
      const double b = normal(engine);
      z[j] = sqrt_eigenvalues_[j] * std::complex<double>(a, b);
    }
    Eigen::FFT<double> fft;
    fft.fwd(y, z);
    for (int k = 0; k < n; ++k) {
      noise[k] = y[k].real();
    }
  } else {
    Eigen::VectorXd z(n);
    for (int k = 0; k < n; ++k) {
      z[k] = normal(engine);
    }
    noise = lower_ * z;
  }
  const double scale = std::pow(grid_.dt(), hurst_);
  for (int k = 0; k < n; ++k) {
    path[k + 1] = path[k] + scale * noise[k];
  }
  return path;
}

SampledPath FbmGenerator::sample(std::uint64_t seed, int dim) const {
  Eigen::MatrixXd v(grid_.n_nodes(), dim);
  for (int k = 0; k < dim; ++k) {
    v.col(k) = sample_scalar(derive_seed(seed, SeedLane::path, static_cast<std::uint64_t>(k)));
  }
  return SampledPath(grid_, std::move(v));
}

FbmDraw gen_fbm_traced(const FbmSpec &spec, const TimeGrid &grid, FbmMethod strategy) {
  spec.validate();
  const FbmGenerator gen(spec.hurst, grid, strategy);
  return {gen.sample(spec.seed, spec.dim), gen.method()};
}

// ---------------------------------------------------------------------------

HolderEstimate holder_seminorm(const SampledPath &path, double exponent, PairStrategy strategy, int window) {
  return holder_seminorm_rows(path.values, path.grid.dt(), exponent, strategy, window);
}

double holder_norm(const SampledPath &path, double exponent, PairStrategy strategy) {
  return path.sup_norm() + holder_seminorm(path, exponent, strategy).seminorm;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_path_csv(std::ostream &os, const SampledPath &path) {
  os << 't';
  for (int k = 1; k <= path.dim(); ++k) {
    os << ",x_" << k;
  }
  os << '\n';
  for (int i = 0; i < path.n_nodes(); ++i) {
    os << format_double(path.grid.node(i));
    for (int k = 0; k < path.dim(); ++k) {
      os << ',' << format_double(path.values(i, k));
    }
    os << '\n';
  }
}

SampledPath read_path_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,", 0) != 0) {
    throw std::runtime_error("read_path_csv: missing `t,x_1,...` header");
  }
  const int dim = static_cast<int>(std::count(line.begin(), line.end(), ','));
  std::vector<double> t;
  std::vector<double> flat;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      const double v = std::stod(cell);
      (col == 0 ? t : flat).push_back(v);
      ++col;
    }
    if (col != dim + 1) {
      throw std::runtime_error("read_path_csv: ragged row");
    }
  }
  if (t.size() < 2) {
    throw std::runtime_error("read_path_csv: need at least two rows");
  }
  const TimeGrid grid(t.back(), static_cast<int>(t.size()) - 1);
  Eigen::MatrixXd v(grid.n_nodes(), dim);
  for (int i = 0; i < grid.n_nodes(); ++i) {
    for (int k = 0; k < dim; ++k) {
      v(i, k) = flat[static_cast<std::size_t>(i * dim + k)];
    }
  }
  return SampledPath(grid, std::move(v));
}

} // namespace yr
