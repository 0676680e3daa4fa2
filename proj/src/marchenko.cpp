#include "mkdv/marchenko.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mkdv {

Mat solve_matrix_equation(const Mat& l, const Mat& r, const Mat& rhs) {
  if (!l.square() || !r.square() || rhs.rows() != l.rows() ||
      rhs.cols() != r.rows())
    throw std::invalid_argument("solve_matrix_equation shape mismatch");
  const std::size_t n = l.rows(), m = r.rows();

  Mat k = kron(Mat::identity(m), l) + kron(transpose(r), Mat::identity(n));
  Mat vec(n * m, 1);  // column-stacked RHS
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) vec(j * n + i, 0) = rhs(i, j);

  Mat sol;
  try {
    sol = lu_solve(k, vec);
  } catch (const singular_error&) {
    throw singular_error(
        "matrix equation not uniquely solvable: spectra of L and -R intersect");
  }
  Mat x(n, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) x(i, j) = sol(j * n + i, 0);
  return x;
}

MarchenkoSolutions solve_all(const Triplet& t) {
  const Mat at = transpose(t.A);
  Mat p = solve_matrix_equation(t.A, t.A, t.B * t.C);
  Mat q = solve_matrix_equation(at, t.A, transpose(t.C) * t.C);
  Mat n = solve_matrix_equation(t.A, at, t.B * transpose(t.B));
  // The exact Q and N are symmetric; drop the antisymmetric round-off.
  q = 0.5 * (q + transpose(q));
  n = 0.5 * (n + transpose(n));
  return {std::move(p), std::move(q), std::move(n)};
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(
    std::size_t n) {
  std::vector<double> nodes(n), weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n(x) = 0.
    double x = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk =
            ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) /
            double(k);
        p0 = p1;
        p1 = pk;
      }
      dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::fabs(step) < 1e-15) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return {std::move(nodes), std::move(weights)};
}

Mat quadrature_oracle(const Triplet& t, WhichIntegral which,
                      std::size_t panel_cap) {
  const double anorm = norm_one(t.A);
  if (anorm == 0.0)
    throw numeric_range_error("quadrature oracle: A is zero, integral diverges");
  const double width = 2.0 / anorm;

  const auto integrand = [&](double s) {
    const Mat ex = expm((-s) * t.A);
    switch (which) {
      case WhichIntegral::P:
        return ex * (t.B * t.C) * ex;
      case WhichIntegral::Q:
        return transpose(ex) * (transpose(t.C) * t.C) * ex;
      default:
        return ex * (t.B * transpose(t.B)) * transpose(ex);
    }
  };

  static const auto gl = gauss_legendre(24);
  const std::size_t p = t.order();
  Mat sum(p, p);
  const double ref = max_abs(integrand(0.0));

  for (std::size_t panel = 0;; ++panel) {
    if (panel >= panel_cap) {
      std::ostringstream msg;
      msg << "quadrature oracle did not converge within " << panel_cap
          << " panels; is A positive stable?";
      throw numeric_range_error(msg.str());
    }
    const double a = double(panel) * width;
    Mat part(p, p);
    double panel_max = 0.0;
    for (std::size_t i = 0; i < gl.first.size(); ++i) {
      const double s = a + (gl.first[i] + 1.0) * 0.5 * width;
      const Mat m = integrand(s);
      panel_max = std::max(panel_max, max_abs(m));
      part = part + (gl.second[i] * 0.5 * width) * m;
    }
    if (panel > 0 && panel_max < 1e-16 * ref) break;
    sum = sum + part;
  }
  return sum;
}

}  // namespace mkdv
