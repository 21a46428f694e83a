#include "lqpg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lqpg/error.hpp"

namespace lqpg {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

void require_square(const Mat& m, const char* what) {
  if (!m.square()) {
    throw Error(ErrorCode::NonSquare,
                std::string(what) + ": " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
}

double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_)
      throw Error(ErrorCode::DimensionMismatch, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(std::span<const double> entries) {
  Mat m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

Mat Mat::column(std::span<const double> v) {
  Mat m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Mat Mat::symmetrized() const {
  require_square(*this, "symmetrized");
  Mat s(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
  return s;
}

Mat Mat::block(std::size_t r0, std::size_t c0, std::size_t nr,
               std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_)
    throw Error(ErrorCode::DimensionMismatch, "block out of range");
  Mat b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Mat::set_block(std::size_t r0, std::size_t c0, const Mat& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
    throw Error(ErrorCode::DimensionMismatch, "set_block out of range");
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

double Mat::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Mat::frobenius() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool Mat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Mat& Mat::operator+=(const Mat& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(Mat a, double s) { return a *= s; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorCode::DimensionMismatch,
                "product " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " * " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vec operator*(const Mat& a, std::span<const double> x) {
  if (a.cols() != x.size())
    throw Error(ErrorCode::DimensionMismatch, "matrix-vector product");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Mat vstack(const Mat& top, const Mat& bottom) {
  if (top.cols() != bottom.cols())
    throw Error(ErrorCode::DimensionMismatch, "vstack");
  Mat m(top.rows() + bottom.rows(), top.cols());
  m.set_block(0, 0, top);
  m.set_block(top.rows(), 0, bottom);
  return m;
}

Mat hstack(const Mat& left, const Mat& right) {
  if (left.rows() != right.rows())
    throw Error(ErrorCode::DimensionMismatch, "hstack");
  Mat m(left.rows(), left.cols() + right.cols());
  m.set_block(0, 0, left);
  m.set_block(0, left.cols(), right);
  return m;
}

Vec add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "vector add");
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Vec sub(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "vector sub");
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "vector dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double quad_form(const Mat& m, std::span<const double> x) {
  return dot(x, m * x);
}

double relative_gap(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "relative_gap");
  const double scale = std::max({1.0, a.max_abs(), b.max_abs()});
  return (a - b).max_abs() / scale;
}

CholeskyResult cholesky_pd(const Mat& m, double tol) {
  require_square(m, "cholesky_pd");
  const std::size_t n = m.rows();
  Mat a = m.symmetrized();
  Mat l(n, n);
  CholeskyResult result{true, std::numeric_limits<double>::infinity()};
  if (n == 0) return result;
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    result.min_pivot = std::min(result.min_pivot, pivot);
    if (!(pivot > tol)) {
      result.is_pd = false;
      return result;
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / d;
    }
  }
  return result;
}

Vec sym_eig(const Mat& m) {
  require_square(m, "sym_eig");
  const std::size_t n = m.rows();
  Mat a = m.symmetrized();
  // Absolute threshold for unit-scale input; scaled for large entries so
  // that rounding in the rotations cannot stall convergence.
  const double threshold = 1e-12 * std::max(1.0, a.frobenius());
  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  while (off_diagonal_norm(a) >= threshold) {
    if (++sweep > kMaxSweeps)
      throw Error(ErrorCode::NoConvergence, "Jacobi did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  Vec eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double lambda_min(const Mat& m) {
  const Vec e = sym_eig(m);
  return e.empty() ? 0.0 : e.front();
}

double lambda_max(const Mat& m) {
  const Vec e = sym_eig(m);
  return e.empty() ? 0.0 : e.back();
}

SingularExtremes singular_extremes(const Mat& m, double tol) {
  const Vec eig = sym_eig(m.transpose() * m);
  SingularExtremes out;
  bool found = false;
  for (double lam : eig) {
    const double sigma = std::sqrt(std::max(0.0, lam));
    if (sigma > tol && !found) {
      out.sigma_min_pos = sigma;
      found = true;
    }
    out.sigma_max = std::max(out.sigma_max, sigma);
  }
  if (!found)
    throw Error(ErrorCode::AllZero, "no singular value above tolerance");
  return out;
}

double norm2(const Mat& m) {
  if (m.empty() || m.max_abs() == 0.0) return 0.0;
  const Vec eig = sym_eig(m.transpose() * m);
  return std::sqrt(std::max(0.0, eig.back()));
}

double spectral_radius_est(const Mat& m) {
  require_square(m, "spectral_radius_est");
  constexpr int kSquarings = 7;  // M^128
  double scale = m.frobenius();
  if (scale == 0.0) return 0.0;
  if (!std::isfinite(scale))
    throw Error(ErrorCode::Overflow, "non-finite input to spectral radius");
  Mat p = m * (1.0 / scale);
  double log_scale = std::log(scale);
  for (int k = 0; k < kSquarings; ++k) {
    p = p * p;
    const double s = p.frobenius();
    if (s == 0.0) return 0.0;  // nilpotent within 2^k steps
    if (!std::isfinite(s))
      throw Error(ErrorCode::Overflow, "scaled power overflowed");
    p *= 1.0 / s;
    log_scale = 2.0 * log_scale + std::log(s);
  }
  const double rho =
      std::exp((log_scale + std::log(norm2(p))) / double(1 << kSquarings));
  if (!std::isfinite(rho))
    throw Error(ErrorCode::Overflow, "spectral radius estimate not finite");
  return rho;
}

Mat solve(const Mat& a, const Mat& b) {
  require_square(a, "solve");
  if (a.rows() != b.rows())
    throw Error(ErrorCode::DimensionMismatch, "solve right-hand side");
  const std::size_t n = a.rows();
  Mat lu = a;
  Mat x = b;
  const double singular_floor =
      std::numeric_limits<double>::epsilon() * std::max(1.0, a.max_abs()) *
      static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (std::abs(lu(piv, k)) <= singular_floor)
      throw Error(ErrorCode::Singular, "pivot below floor in LU");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      lu(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double s = x(kk, j);
      for (std::size_t i = kk + 1; i < n; ++i) s -= lu(kk, i) * x(i, j);
      x(kk, j) = s / lu(kk, kk);
    }
  }
  return x;
}

}  // namespace lqpg
