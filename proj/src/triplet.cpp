#include "mkdv/triplet.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

#include "mkdv/marchenko.hpp"

namespace mkdv {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Triplet::Triplet(Mat a, Mat b, Mat c)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
  require(A.square() && A.rows() >= 1, "A must be square and nonempty");
  require(B.rows() == A.rows() && B.cols() == 1, "B must be a p x 1 column");
  require(C.rows() == 1 && C.cols() == A.rows(), "C must be a 1 x p row");
  require(A.all_finite() && B.all_finite() && C.all_finite(),
          "triplet entries must be finite");
}

std::pair<std::size_t, std::size_t> check_minimality(const Triplet& t,
                                                     double tol) {
  const std::size_t p = t.order();
  Mat obs(p, p);   // rows C, CA, ..., CA^{p-1}
  Mat ctrl(p, p);  // columns B, AB, ..., A^{p-1}B
  Mat crow = t.C;
  Mat bcol = t.B;
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t j = 0; j < p; ++j) {
      obs(k, j) = crow(0, j);
      ctrl(j, k) = bcol(j, 0);
    }
    crow = crow * t.A;
    bcol = t.A * bcol;
  }
  return {rank(obs, tol), rank(ctrl, tol)};
}

bool check_positive_stable(const Triplet& t) {
  Mat x;
  try {
    x = solve_matrix_equation(transpose(t.A), t.A, Mat::identity(t.order()));
  } catch (const singular_error&) {
    // A^T X + X A = I not uniquely solvable: some eigenvalue pair of A is
    // symmetric about the imaginary axis, which rules out positive stability.
    return false;
  }
  x = 0.5 * (x + transpose(x));
  return cholesky_pd(x).has_value();
}

ValidationReport check_admissible(const Triplet& t) {
  ValidationReport rep;
  const std::size_t p = t.order();

  auto ranks = check_minimality(t);
  rep.observability_rank = ranks.first;
  rep.controllability_rank = ranks.second;
  rep.minimal = (ranks.first == p && ranks.second == p);
  if (!rep.minimal) {
    std::ostringstream msg;
    msg << "triplet is not minimal: observability rank " << ranks.first
        << ", controllability rank " << ranks.second << ", order " << p;
    rep.messages.push_back(msg.str());
  }

  rep.positive_stable = check_positive_stable(t);
  if (!rep.positive_stable)
    rep.messages.push_back(
        "A is not positive stable: some eigenvalue has nonpositive real part");

  try {
    solve_matrix_equation(t.A, t.A, t.B * t.C);
    rep.sylvester_solvable = true;
  } catch (const singular_error&) {
    rep.sylvester_solvable = false;
    rep.messages.push_back(
        "matrix equations not uniquely solvable: eigenvalues symmetric about "
        "imaginary axis or purely imaginary");
  }
  return rep;
}

Triplet canonical_real_block(double omega, const std::vector<double>& c) {
  const std::size_t n = c.size();
  require(n >= 1, "real block needs at least one c entry");
  require(std::isfinite(omega) && omega > 0.0, "real block needs omega > 0");
  require(c.back() != 0.0, "real block needs a nonzero last c entry");

  Mat a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = omega;
    if (i + 1 < n) a(i, i + 1) = -1.0;
  }
  Mat b(n, 1);
  b(n - 1, 0) = 1.0;
  Mat crow(1, n);
  for (std::size_t i = 0; i < n; ++i) crow(0, i) = c[n - 1 - i];
  return Triplet(std::move(a), std::move(b), std::move(crow));
}

Triplet canonical_complex_block(double alpha, double beta,
                                const std::vector<double>& gamma,
                                const std::vector<double>& epsilon) {
  const std::size_t n = gamma.size();
  require(n >= 1, "complex block needs at least one gamma entry");
  require(epsilon.size() == n, "gamma and epsilon must have equal length");
  require(std::isfinite(alpha) && alpha > 0.0, "complex block needs alpha > 0");
  require(std::isfinite(beta), "complex block needs finite beta");
  require(gamma.back() * gamma.back() + epsilon.back() * epsilon.back() > 0.0,
          "complex block needs gamma_n^2 + epsilon_n^2 > 0");

  Mat a(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    a(2 * i, 2 * i) = alpha;
    a(2 * i, 2 * i + 1) = beta;
    a(2 * i + 1, 2 * i) = -beta;
    a(2 * i + 1, 2 * i + 1) = alpha;
    if (i + 1 < n) {
      a(2 * i, 2 * i + 2) = -1.0;
      a(2 * i + 1, 2 * i + 3) = -1.0;
    }
  }
  Mat b(2 * n, 1);
  b(2 * n - 1, 0) = 1.0;
  Mat crow(1, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    crow(0, 2 * i) = gamma[n - 1 - i];
    crow(0, 2 * i + 1) = epsilon[n - 1 - i];
  }
  return Triplet(std::move(a), std::move(b), std::move(crow));
}

Triplet assemble_canonical(const std::vector<BlockSpec>& blocks) {
  require(!blocks.empty(), "need at least one block");

  // Eigenvalue parameters must differ exactly across blocks; they are user
  // inputs, so no numeric tolerance applies. Complex pairs compare up to
  // conjugation, i.e. on (alpha, |beta|).
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = i + 1; j < blocks.size(); ++j) {
      const auto* ri = std::get_if<RealBlock>(&blocks[i]);
      const auto* rj = std::get_if<RealBlock>(&blocks[j]);
      const auto* ci = std::get_if<ComplexBlock>(&blocks[i]);
      const auto* cj = std::get_if<ComplexBlock>(&blocks[j]);
      if (ri && rj && ri->omega == rj->omega) {
        std::ostringstream msg;
        msg << "duplicate eigenvalue across real blocks: omega=" << ri->omega;
        throw std::invalid_argument(msg.str());
      }
      if (ci && cj && ci->alpha == cj->alpha &&
          std::fabs(ci->beta) == std::fabs(cj->beta)) {
        std::ostringstream msg;
        msg << "duplicate eigenvalue pair across complex blocks: alpha="
            << ci->alpha << ", |beta|=" << std::fabs(ci->beta);
        throw std::invalid_argument(msg.str());
      }
    }

  std::vector<Triplet> parts;
  parts.reserve(blocks.size());
  std::size_t p = 0;
  for (const auto& blk : blocks) {
    if (const auto* r = std::get_if<RealBlock>(&blk))
      parts.push_back(canonical_real_block(r->omega, r->c));
    else {
      const auto& c = std::get<ComplexBlock>(blk);
      parts.push_back(canonical_complex_block(c.alpha, c.beta, c.gamma, c.epsilon));
    }
    p += parts.back().order();
  }

  Mat a(p, p), b(p, 1), crow(1, p);
  std::size_t off = 0;
  for (const auto& part : parts) {
    const std::size_t n = part.order();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(off + i, off + j) = part.A(i, j);
      b(off + i, 0) = part.B(i, 0);
      crow(0, off + i) = part.C(0, i);
    }
    off += n;
  }
  return Triplet(std::move(a), std::move(b), std::move(crow));
}

}  // namespace mkdv
