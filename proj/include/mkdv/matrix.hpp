#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mkdv {

// Raised when an exponent or entry leaves the representable range.
struct numeric_range_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a pivot falls below working precision.
struct singular_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense real matrix, row-major. Sizes stay small (p <= ~32), so everything
// is plain O(n^3) with no blocking.
class Mat {
public:
  Mat() : rows_(0), cols_(0) {}
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  // Brace-of-braces constructor; validates that every entry is finite.
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat zero(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }
  static Mat col_vec(const std::vector<double>& v);
  static Mat row_vec(const std::vector<double>& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  bool all_finite() const;

private:
  std::size_t rows_, cols_;
  std::vector<double> a_;
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& a);
Mat transpose(const Mat& a);

double norm_one(const Mat& a);   // max column sum
double norm_inf(const Mat& a);   // max row sum
double max_abs(const Mat& a);
double trace(const Mat& a);
double dot(const Mat& a, const Mat& b);  // vectors of equal shape

// LU with partial pivoting, kept around for repeated solves against one matrix.
class LuFactors {
public:
  explicit LuFactors(Mat m);  // throws singular_error on a degenerate pivot

  Mat solve(const Mat& rhs) const;
  double log_abs_det() const;
  int det_sign() const { return sign_; }
  std::size_t order() const { return lu_.rows(); }

private:
  Mat lu_;
  std::vector<std::size_t> perm_;
  int sign_;
};

Mat lu_solve(const Mat& m, const Mat& rhs);

// Cholesky factor of a symmetric positive definite matrix. Absence (not an
// error) signals an indefinite input; asymmetry beyond 1e-12*||M|| throws.
std::optional<Mat> cholesky_pd(const Mat& m);

// Forward/back substitution against a lower-triangular factor L.
Mat solve_lower(const Mat& l, const Mat& rhs);            // L x = rhs
Mat solve_lower_transposed(const Mat& l, const Mat& rhs); // L^T x = rhs

// e^M by scaling-and-squaring with the (6,6) Pade approximant, scaled until
// ||M/2^s||_1 <= 0.5. Throws numeric_range_error if the result overflows.
Mat expm(const Mat& m);

// Numerical rank by row reduction with complete pivoting; entries below
// tol * (largest initial pivot) count as zero.
std::size_t rank(const Mat& m, double tol);

double log_abs_det(const Mat& m);

Mat kron(const Mat& a, const Mat& b);

}  // namespace mkdv
