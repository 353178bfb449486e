#include "les/distances.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "les/error.hpp"

namespace les::distances {

LesDescriptor les_descriptor(const spectral::Spectrum& spectrum, double gamma,
                             std::string dataset_name, SigmaRule sigma_rule) {
  if (!(gamma > 0.0)) throw_config("gamma must be positive");
  LesDescriptor d;
  d.f.resize(spectrum.values.size());
  for (Index i = 0; i < d.f.size(); ++i) d.f[i] = std::log(spectrum.values[i] + gamma);
  d.gamma = gamma;
  d.rank_k = spectrum.values.size();
  d.sigma_rule = std::move(sigma_rule);
  d.seed = spectrum.seed;
  d.dataset_name = std::move(dataset_name);
  d.method = spectrum.method;
  return d;
}

Vector descriptor_spectrum(const LesDescriptor& d) {
  Vector out(d.f.size());
  for (Index i = 0; i < d.f.size(); ++i) out[i] = std::max(0.0, std::exp(d.f[i]) - d.gamma);
  return out;
}

void check_comparable(const LesDescriptor& a, const LesDescriptor& b) {
  if (a.rank_k != b.rank_k || a.f.size() != b.f.size() || a.gamma != b.gamma) {
    std::ostringstream os;
    os.precision(17);
    os << "descriptors '" << a.dataset_name << "' (k=" << a.rank_k << ", gamma=" << a.gamma
       << ") and '" << b.dataset_name << "' (k=" << b.rank_k << ", gamma=" << b.gamma
       << ") are not comparable";
    throw_config(os.str());
  }
}

double les_distance_squared(const LesDescriptor& a, const LesDescriptor& b) {
  check_comparable(a, b);
  return (a.f - b.f).squaredNorm();
}

double les_distance(const LesDescriptor& a, const LesDescriptor& b) {
  return std::sqrt(les_distance_squared(a, b));
}

// ---------------------------------------------------------------------------

namespace {

Vector sorted(const Vector& v, bool descending) {
  Vector out = v;
  if (descending)
    std::sort(out.begin(), out.end(), std::greater<>());
  else
    std::sort(out.begin(), out.end());
  return out;
}

double paired_log_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw_config("spectra must have equal length");
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0) || !(b[i] > 0.0))
      throw_numerical("log-Euclidean bound needs strictly positive eigenvalues");
    const double diff = std::log(a[i]) - std::log(b[i]);
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

double le_lower_bound(const Vector& a, const Vector& b) {
  return paired_log_distance(sorted(a, true), sorted(b, true));
}

double le_upper_bound(const Vector& a, const Vector& b) {
  return paired_log_distance(sorted(a, true), sorted(b, false));
}

double le_lower_bound(const spectral::Spectrum& a, const spectral::Spectrum& b) {
  return le_lower_bound(a.values, b.values);
}

double le_upper_bound(const spectral::Spectrum& a, const spectral::Spectrum& b) {
  return le_upper_bound(a.values, b.values);
}

// ---------------------------------------------------------------------------

namespace {

struct SymEig {
  Vector values;
  Matrix vectors;
};

SymEig spd_eig(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw_config(std::string(what) + ": matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw_numerical(std::string(what) + ": eigensolver did not converge");
  SymEig out{solver.eigenvalues(), solver.eigenvectors()};
  if (out.values.size() > 0 && out.values.minCoeff() < -kSpdTolerance) {
    std::ostringstream os;
    os << what << ": matrix is not SPD (eigenvalue " << out.values.minCoeff() << ")";
    throw_numerical(os.str());
  }
  return out;
}

Matrix apply_spectral(const SymEig& e, const std::function<double(double)>& fn) {
  Vector mapped(e.values.size());
  for (Index i = 0; i < mapped.size(); ++i) mapped[i] = fn(std::max(e.values[i], kEigenFloor));
  return e.vectors * mapped.asDiagonal() * e.vectors.transpose();
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw_config(std::string(what) + ": matrices must have the same shape");
}

}  // namespace

Matrix spd_log(const Matrix& a) {
  return apply_spectral(spd_eig(a, "matrix log"), [](double x) { return std::log(x); });
}

Matrix spd_power(const Matrix& a, double t) {
  return apply_spectral(spd_eig(a, "matrix power"), [t](double x) { return std::pow(x, t); });
}

double le_exact(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "le_exact");
  return (spd_log(a) - spd_log(b)).norm();
}

double le_exact(const operators::SpdOperator& a, const operators::SpdOperator& b) {
  return le_exact(a.dense(), b.dense());
}

double loghs_distance(const Matrix& a, const Matrix& b, double gamma, double mu) {
  check_same_shape(a, b, "loghs_distance");
  if (!(gamma > 0.0) || !(mu > 0.0)) throw_config("loghs_distance: gamma and mu must be positive");
  const Index n = a.rows();
  const Matrix la = spd_log(a / gamma + Matrix::Identity(n, n));
  const Matrix lb = spd_log(b / mu + Matrix::Identity(n, n));
  const double scale = std::log(gamma) - std::log(mu);
  return std::sqrt(scale * scale + (la - lb).squaredNorm());
}

double ai_exact(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "ai_exact");
  const SymEig ea = spd_eig(a, "ai_exact");
  if (ea.values.size() > 0 && !(ea.values.minCoeff() > 0.0))
    throw_numerical("ai_exact: first matrix is singular");
  spd_eig(b, "ai_exact");
  Vector inv_sqrt = ea.values.cwiseSqrt().cwiseInverse();
  const Matrix a_inv_sqrt = ea.vectors * inv_sqrt.asDiagonal() * ea.vectors.transpose();
  Matrix c = a_inv_sqrt * b * a_inv_sqrt;
  c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(c, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw_numerical("ai_exact: eigensolver did not converge");
  double s = 0.0;
  for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double l = std::log(std::max(solver.eigenvalues()[i], kEigenFloor));
    s += l * l;
  }
  return std::sqrt(s);
}

double euclid_exact(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "euclid_exact");
  return (a - b).norm();
}

double specgw_exact(const Matrix& a, const Matrix& b, std::span<const double> t_grid) {
  check_same_shape(a, b, "specgw_exact");
  if (t_grid.empty()) throw_config("specgw_exact: empty t grid");
  for (double t : t_grid)
    if (!(t > 0.0)) throw_config("specgw_exact: t must be positive");
  const SymEig ea = spd_eig(a, "specgw_exact");
  const SymEig eb = spd_eig(b, "specgw_exact");
  double best = 0.0;
  for (double t : t_grid) {
    auto pw = [t](double x) { return std::pow(x, t); };
    const double diff = (apply_spectral(ea, pw) - apply_spectral(eb, pw)).norm();
    best = std::max(best, std::exp(-(t + 1.0 / t)) * diff);
  }
  return best;
}

std::vector<double> default_t_grid(std::size_t count, double lo, double hi) {
  if (count == 0 || !(lo > 0.0) || !(hi >= lo)) throw_config("invalid t grid");
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

double imd_approx(const Vector& a, const Vector& b, double /*gamma*/,
                  std::span<const double> t_grid) {
  if (a.size() != b.size()) throw_config("imd_approx: spectra must have equal length");
  if (t_grid.empty()) throw_config("imd_approx: empty t grid");
  double best = 0.0;
  for (double t : t_grid) {
    if (!(t > 0.0)) throw_config("imd_approx: t must be positive");
    double sa = 0.0, sb = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
      sa += std::pow(std::max(a[i], 0.0), t);
      sb += std::pow(std::max(b[i], 0.0), t);
    }
    best = std::max(best, std::exp(-2.0 * (t + 1.0 / t)) * std::abs(sa - sb));
  }
  return best;
}

double imd_approx(const spectral::Spectrum& a, const spectral::Spectrum& b, double gamma,
                  std::span<const double> t_grid) {
  return imd_approx(a.values, b.values, gamma, t_grid);
}

}  // namespace les::distances
