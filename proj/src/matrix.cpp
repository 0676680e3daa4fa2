#include "mkdv/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mkdv {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  a_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "ragged matrix initializer");
    for (double v : r) {
      require(std::isfinite(v), "non-finite entry in matrix construction");
      a_.push_back(v);
    }
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::col_vec(const std::vector<double>& v) {
  Mat m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(std::isfinite(v[i]), "non-finite entry in vector construction");
    m(i, 0) = v[i];
  }
  return m;
}

Mat Mat::row_vec(const std::vector<double>& v) {
  Mat m(1, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(std::isfinite(v[i]), "non-finite entry in vector construction");
    m(0, i) = v[i];
  }
  return m;
}

bool Mat::all_finite() const {
  for (double v : a_)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat operator+(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "shape mismatch in +");
  Mat r = a;
  for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] += b.data()[i];
  return r;
}

Mat operator-(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "shape mismatch in -");
  Mat r = a;
  for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] -= b.data()[i];
  return r;
}

Mat operator*(const Mat& a, const Mat& b) {
  require(a.cols() == b.rows(), "shape mismatch in *");
  Mat r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

Mat operator*(double s, const Mat& a) {
  Mat r = a;
  for (double& v : r.data()) v *= s;
  return r;
}

Mat transpose(const Mat& a) {
  Mat r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

double norm_one(const Mat& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::fabs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double norm_inf(const Mat& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::fabs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double max_abs(const Mat& a) {
  double best = 0.0;
  for (double v : a.data()) best = std::max(best, std::fabs(v));
  return best;
}

double trace(const Mat& a) {
  require(a.square(), "trace of non-square matrix");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

double dot(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "shape mismatch in dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

LuFactors::LuFactors(Mat m) : lu_(std::move(m)), sign_(1) {
  require(lu_.square(), "LU of non-square matrix");
  const std::size_t n = lu_.rows();
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

  // Singularity threshold relative to the largest entry of the input.
  const double scale = max_abs(lu_);
  const double tiny = scale * n * std::numeric_limits<double>::epsilon();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::fabs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(lu_(i, k));
      if (v > best) { best = v; piv = i; }
    }
    if (!(best > tiny))
      throw singular_error("matrix singular to working precision");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / lu_(k, k);
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

Mat LuFactors::solve(const Mat& rhs) const {
  const std::size_t n = lu_.rows();
  require(rhs.rows() == n, "rhs row count mismatch in solve");
  Mat x(n, rhs.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rhs.cols(); ++j) x(i, j) = rhs(perm_[i], j);
  // Ly = Pb
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) {
      const double f = lu_(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  // Ux = y
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double f = lu_(ii, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < x.cols(); ++j) x(ii, j) -= f * x(k, j);
    }
    const double d = lu_(ii, ii);
    for (std::size_t j = 0; j < x.cols(); ++j) x(ii, j) /= d;
  }
  return x;
}

double LuFactors::log_abs_det() const {
  double s = 0.0;
  for (std::size_t i = 0; i < lu_.rows(); ++i) s += std::log(std::fabs(lu_(i, i)));
  return s;
}

Mat lu_solve(const Mat& m, const Mat& rhs) { return LuFactors(m).solve(rhs); }

std::optional<Mat> cholesky_pd(const Mat& m) {
  require(m.square(), "cholesky of non-square matrix");
  const std::size_t n = m.rows();
  const double scale = max_abs(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > 1e-12 * std::max(scale, 1.0))
        throw std::invalid_argument("cholesky of asymmetric matrix");

  Mat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Mat solve_lower(const Mat& l, const Mat& rhs) {
  const std::size_t n = l.rows();
  require(rhs.rows() == n, "rhs row count mismatch in solve_lower");
  Mat x = rhs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const double f = l(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
    const double d = l(i, i);
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) /= d;
  }
  return x;
}

Mat solve_lower_transposed(const Mat& l, const Mat& rhs) {
  const std::size_t n = l.rows();
  require(rhs.rows() == n, "rhs row count mismatch in solve_lower_transposed");
  Mat x = rhs;
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double f = l(k, ii);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < x.cols(); ++j) x(ii, j) -= f * x(k, j);
    }
    const double d = l(ii, ii);
    for (std::size_t j = 0; j < x.cols(); ++j) x(ii, j) /= d;
  }
  return x;
}

Mat expm(const Mat& m) {
  require(m.square(), "expm of non-square matrix");
  const std::size_t n = m.rows();

  // Squaring count so the scaled one-norm drops to <= 0.5.
  int s = 0;
  double nrm = norm_one(m);
  while (nrm > 0.5) {
    nrm *= 0.5;
    ++s;
    if (s > 200) throw numeric_range_error("expm argument too large to scale");
  }
  Mat a = std::ldexp(1.0, -s) * m;

  // (6,6) Pade: N(M) = sum c_k M^k, D(M) = N(-M).
  static const double c[7] = {1.0,       1.0 / 2.0,   5.0 / 44.0, 1.0 / 66.0,
                              1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  Mat pw = Mat::identity(n);
  Mat num = Mat::identity(n);
  Mat den = Mat::identity(n);
  for (int k = 1; k <= 6; ++k) {
    pw = pw * a;
    num = num + c[k] * pw;
    den = den + ((k % 2 == 0) ? c[k] : -c[k]) * pw;
  }
  Mat r = lu_solve(den, num);
  for (int i = 0; i < s; ++i) r = r * r;
  if (!r.all_finite())
    throw numeric_range_error("expm overflow: non-finite entries in result");
  return r;
}

std::size_t rank(const Mat& m, double tol) {
  require(tol > 0.0, "rank tolerance must be positive");
  Mat w = m;
  const std::size_t nr = w.rows(), nc = w.cols();
  const double pivot0 = max_abs(w);
  if (pivot0 == 0.0) return 0;
  const double cut = tol * pivot0;

  std::size_t r = 0;
  std::vector<bool> used_row(nr, false);
  for (std::size_t step = 0; step < std::min(nr, nc); ++step) {
    // Complete pivoting over the untouched rows.
    std::size_t pi = 0, pj = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
      if (used_row[i]) continue;
      for (std::size_t j = 0; j < nc; ++j) {
        const double v = std::fabs(w(i, j));
        if (v > best) { best = v; pi = i; pj = j; }
      }
    }
    if (best <= cut) break;
    used_row[pi] = true;
    ++r;
    for (std::size_t i = 0; i < nr; ++i) {
      if (used_row[i]) continue;
      const double f = w(i, pj) / w(pi, pj);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < nc; ++j) w(i, j) -= f * w(pi, j);
    }
  }
  return r;
}

double log_abs_det(const Mat& m) { return LuFactors(m).log_abs_det(); }

Mat kron(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

}  // namespace mkdv
