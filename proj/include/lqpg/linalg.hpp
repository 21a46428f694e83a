#pragma once

// Small dense real linear algebra, sized for state and joint-control
// dimensions up to a few dozen. Storage is row-major.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lqpg {

/// Numerical thresholds shared by every module.
struct Tolerances {
  double pd_pivot = 1e-10;         // Cholesky pivot must exceed this
  double symmetry = 1e-8;          // relative asymmetry allowed
  double equality = 1e-8;          // relative matrix equality
  double spectral_margin = 1e-6;   // stability needs rho < 1 - margin
  double singular_value = 1e-10;   // smallest singular value counted as nonzero
};

using Vec = std::vector<double>;

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Row-wise literal, e.g. Mat{{1, 2}, {3, 4}}.
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat diag(std::span<const double> entries);
  static Mat column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> data() const noexcept { return data_; }

  Mat transpose() const;
  Mat symmetrized() const;
  Mat block(std::size_t r0, std::size_t c0, std::size_t nr,
            std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Mat& b);

  double max_abs() const;
  double frobenius() const;
  bool all_finite() const;

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(Mat a, double s);
Mat operator*(double s, Mat a);
Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, std::span<const double> x);

/// Stacks [top; bottom] (same column count).
Mat vstack(const Mat& top, const Mat& bottom);
/// Concatenates [left right] (same row count).
Mat hstack(const Mat& left, const Mat& right);

Vec add(std::span<const double> a, std::span<const double> b);
Vec sub(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
/// xᵀ M x.
double quad_form(const Mat& m, std::span<const double> x);

/// max |a - b| / max(1, max|a|, max|b|).
double relative_gap(const Mat& a, const Mat& b);

struct CholeskyResult {
  bool is_pd = false;
  double min_pivot = 0.0;
};

/// Cholesky on (M + Mᵀ)/2. Stops at the first pivot <= tol and reports it.
CholeskyResult cholesky_pd(const Mat& m, double tol);

/// Ascending eigenvalues of (M + Mᵀ)/2 by cyclic Jacobi rotations.
Vec sym_eig(const Mat& m);

double lambda_min(const Mat& m);
double lambda_max(const Mat& m);

struct SingularExtremes {
  double sigma_max = 0.0;
  double sigma_min_pos = 0.0;
};

/// Largest singular value and smallest one above `tol`. Throws AllZero when
/// no singular value exceeds `tol`.
SingularExtremes singular_extremes(const Mat& m, double tol = 1e-10);

/// Spectral (operator 2-) norm; 0 for the zero matrix.
double norm2(const Mat& m);

/// Gelfand estimate ‖M^128‖₂^(1/128) by seven scaled squarings.
double spectral_radius_est(const Mat& m);

/// Solves A X = B by LU with partial pivoting. Throws Singular.
Mat solve(const Mat& a, const Mat& b);

}  // namespace lqpg
