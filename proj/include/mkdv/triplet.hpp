#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mkdv/matrix.hpp"

namespace mkdv {

// Real matrix triplet (A, B, C) of order p: A is p x p, B a column, C a row.
// It generates the kernel C e^{-Ay} B that everything downstream consumes.
struct Triplet {
  Mat A;
  Mat B;
  Mat C;

  // Validates shapes and finiteness; admissibility is a separate, explicit
  // step (check_admissible) so callers can inspect partial failures.
  Triplet(Mat a, Mat b, Mat c);

  std::size_t order() const { return A.rows(); }
};

// Everything check_admissible learns about a triplet. minimal holds exactly
// when both ranks equal the order.
struct ValidationReport {
  std::size_t observability_rank = 0;
  std::size_t controllability_rank = 0;
  bool minimal = false;
  bool positive_stable = false;
  bool sylvester_solvable = false;
  std::vector<std::string> messages;

  bool all_ok() const { return minimal && positive_stable && sylvester_solvable; }
};

// Ranks of the stacked observability matrix [C; CA; ...; CA^{p-1}] and the
// controllability matrix [B, AB, ..., A^{p-1}B]. Powers beyond p-1 add
// nothing (Cayley-Hamilton), so p blocks suffice.
std::pair<std::size_t, std::size_t> check_minimality(const Triplet& t,
                                                     double tol = 1e-10);

// True iff every eigenvalue of A has positive real part, certified without
// an eigensolver: solve A^T X + X A = I and test X for positive definiteness.
bool check_positive_stable(const Triplet& t);

// Full admissibility screen: minimality, positive stability, and unique
// solvability of the matrix equations (no eigenvalue of A purely imaginary,
// no two eigenvalues symmetric about the imaginary axis).
ValidationReport check_admissible(const Triplet& t);

// Canonical building blocks. A real block contributes one eigenvalue omega
// of multiplicity n = c.size(); a complex block contributes the conjugate
// pair alpha +/- i*beta with multiplicity n = gamma.size().
struct RealBlock {
  double omega = 0.0;
  std::vector<double> c;
};

struct ComplexBlock {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> gamma;
  std::vector<double> epsilon;
};

using BlockSpec = std::variant<RealBlock, ComplexBlock>;

// Single real block: A = omega*I with -1 on the superdiagonal, B = last
// basis vector, C = (c_n, ..., c_1). Requires omega > 0 and c_n != 0.
Triplet canonical_real_block(double omega, const std::vector<double>& c);

// Single complex block of order 2n: 2x2 diagonal cells [[alpha, beta],
// [-beta, alpha]] with -I_2 on the superdiagonal, B = last basis vector,
// C = (gamma_n, epsilon_n, ..., gamma_1, epsilon_1). Requires alpha > 0 and
// gamma_n^2 + epsilon_n^2 > 0.
Triplet canonical_complex_block(double alpha, double beta,
                                const std::vector<double>& gamma,
                                const std::vector<double>& epsilon);

// Block-diagonal assembly of several blocks into one triplet. Eigenvalue
// parameters must be pairwise distinct across blocks, compared exactly on
// the supplied values (omega for real blocks, (alpha, |beta|) for complex).
Triplet assemble_canonical(const std::vector<BlockSpec>& blocks);

}  // namespace mkdv
