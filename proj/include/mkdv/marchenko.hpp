#pragma once

#include "mkdv/triplet.hpp"

namespace mkdv {

// Solutions of the three structure equations
//   A P + P A = B C        (Sylvester)
//   A^T Q + Q A = C^T C    (Lyapunov)
//   A N + N A^T = B B^T    (Lyapunov)
// Q and N are symmetric by construction (symmetrized after the solve).
struct MarchenkoSolutions {
  Mat P;
  Mat Q;
  Mat N;
};

// Unique X with L X + X R = RHS, via the Kronecker vectorization
// (I (x) L + R^T (x) I) vec(X) = vec(RHS) with column-stacked vec.
// O(p^6) is fine at the orders this project handles. Throws singular_error
// wrapped as "equation not uniquely solvable" when spectra of L and -R meet.
Mat solve_matrix_equation(const Mat& l, const Mat& r, const Mat& rhs);

// P, Q, N for one triplet; Q and N come back exactly symmetric.
MarchenkoSolutions solve_all(const Triplet& t);

enum class WhichIntegral { P, Q, N };

// Independent oracle: evaluates the defining semi-infinite integral
//   P = int_0^inf e^{-As} B C e^{-As} ds
//   Q = int_0^inf e^{-A^T s} C^T C e^{-A s} ds
//   N = int_0^inf e^{-A s} B B^T e^{-A^T s} ds
// by composite Gauss-Legendre panels, truncating once a panel's integrand
// max-norm falls below 1e-16 times its s=0 value. panel_cap bounds the
// number of panels; hitting the cap raises numeric_range_error since the
// integral is then not converging (A not positive stable, in practice).
Mat quadrature_oracle(const Triplet& t, WhichIntegral which,
                      std::size_t panel_cap = 400);

// n-point Gauss-Legendre nodes and weights on [-1,1], by Newton iteration
// on the Legendre recurrence. Shared by the quadrature oracle and the
// Marchenko residual integrator.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(
    std::size_t n);

}  // namespace mkdv
