#include "mkdv/solution.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace mkdv {

namespace {

std::string join_messages(const std::vector<std::string>& msgs) {
  std::string out;
  for (const auto& m : msgs) {
    if (!out.empty()) out += "; ";
    out += m;
  }
  return out;
}

// Runs before any structure equation is solved, so inadmissible inputs
// surface as invalid_argument rather than a solver-level singular_error.
void require_admissible(const Triplet& t) {
  auto rep = check_admissible(t);
  if (!rep.all_ok())
    throw std::invalid_argument("triplet not admissible: " +
                                join_messages(rep.messages));
}

// [[X, Y], [Z, W]] with equal p x p blocks.
Mat block2(const Mat& x, const Mat& y, const Mat& z, const Mat& w) {
  const std::size_t p = x.rows();
  Mat k(2 * p, 2 * p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      k(i, j) = x(i, j);
      k(i, p + j) = y(i, j);
      k(p + i, j) = z(i, j);
      k(p + i, p + j) = w(i, j);
    }
  return k;
}

Mat stack_on_zeros(const Mat& top) {
  Mat big(2 * top.rows(), top.cols());
  for (std::size_t i = 0; i < top.rows(); ++i)
    for (std::size_t j = 0; j < top.cols(); ++j) big(i, j) = top(i, j);
  return big;
}

Mat top_block(const Mat& big) {
  const std::size_t p = big.rows() / 2;
  Mat out(p, big.cols());
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < big.cols(); ++j) out(i, j) = big(i, j);
  return out;
}

}  // namespace

// The F-side frame. With Cholesky factors Q = Lq Lq^T, N = Ln Ln^T and
// tau = 2Ax - 8A^3 t,
//   F = Lq (V + Vt) Ln^T,  V = Lq^T e^{-tau} Ln,  Vt = Lq^{-1} e^{tau^T} Ln^{-T},
// and Vt = V^{-T} exactly, so H = V + Vt = W + W^{-T} for W either factor.
// H^{-1} r is then the W^T-image of the first block of
// [[I, -W], [W^T, I]]^{-1} [r; 0], whose conditioning grows only like ||W||.
// Picking W as the smaller of V, Vt keeps ||W|| modest on its branch.
struct SolutionEvaluator::UState {
  Mat v;
  Mat vt;
  Mat w;
  LuFactors lu;
};

// The E-side frame. E = theta + P theta^{-1} P with theta = e^{tau}.
// On the branch where theta stays small, solve [[theta, P], [-P, theta]]
// [z; w] = [r; 0], whose first block is E^{-1} r; as theta -> 0 this tends
// stably to P^{-1} theta P^{-1} r. On the growing branch use G = e^{-tau} P
// and solve [[I, -G], [G, I]] [z; w] = [e^{-tau} r; 0] instead, since
// E = e^{tau} (I + G^2). Both block determinants also compose with the
// exactly known det e^{tau} = e^{tr tau} into log |det E|.
struct SolutionEvaluator::VState {
  bool grow;
  Mat theta_inv;
  double tr_tau;
  LuFactors lu;
};

SolutionEvaluator::SolutionEvaluator(const Triplet& t, EvalOptions opts)
    : trip_(t), opts_(opts) {
  require_admissible(trip_);
  sols_ = solve_all(trip_);
  init();
}

SolutionEvaluator::SolutionEvaluator(const Triplet& t, MarchenkoSolutions sols,
                                     EvalOptions opts)
    : trip_(t), sols_(std::move(sols)), opts_(opts) {
  const std::size_t p = trip_.order();
  if (!sols_.P.square() || sols_.P.rows() != p || !sols_.Q.square() ||
      sols_.Q.rows() != p || !sols_.N.square() || sols_.N.rows() != p)
    throw std::invalid_argument("supplied solutions have wrong shape");
  require_admissible(trip_);
  init();
}

void SolutionEvaluator::init() {
  a3_ = trip_.A * trip_.A * trip_.A;
  tr_a_ = trace(trip_.A);
  tr_a3_ = trace(a3_);
  mu_ = tr_a_ / double(trip_.order());

  auto lq = cholesky_pd(sols_.Q);
  auto ln = cholesky_pd(sols_.N);
  if (!lq || !ln)
    throw std::invalid_argument(
        "Q or N is not positive definite; solutions are inconsistent");
  lq_ = std::move(*lq);
  ln_ = std::move(*ln);

  btil_ = solve_lower(ln_, trip_.B);
  ctil_ = solve_lower(lq_, transpose(trip_.C));
  alpha_ = solve_lower(lq_, transpose(trip_.A) * lq_);
  alpha2_ = alpha_ * alpha_;
  alpha3_ = alpha2_ * alpha_;
}

Mat SolutionEvaluator::tau(double x, double t) const {
  Mat m = (2.0 * x) * trip_.A - (8.0 * t) * a3_;
  const double nrm = norm_one(m);
  if (!(nrm <= opts_.overflow_guard)) {
    std::ostringstream msg;
    msg << "exponent 2Ax-8A^3t has one-norm " << nrm << " at (x,t)=(" << x
        << "," << t << "), beyond overflow guard " << opts_.overflow_guard;
    throw numeric_range_error(msg.str());
  }
  return m;
}

Mat SolutionEvaluator::guarded_expm(const Mat& m, const char* what) const {
  const double nrm = norm_one(m);
  if (!(nrm <= opts_.overflow_guard)) {
    std::ostringstream msg;
    msg << "exponent " << what << " has one-norm " << nrm
        << ", beyond overflow guard " << opts_.overflow_guard;
    throw numeric_range_error(msg.str());
  }
  return expm(m);
}

double SolutionEvaluator::omega(double y, double t) const {
  const Mat ex = guarded_expm((-y) * trip_.A + (8.0 * t) * a3_, "-Ay+8A^3t");
  return (trip_.C * ex * trip_.B)(0, 0);
}

double SolutionEvaluator::omega_pde_residual(double y, double t,
                                             double h) const {
  if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");
  const double d_t = (omega(y, t + h) - omega(y, t - h)) / (2.0 * h);
  const double d_yyy = (omega(y + 2.0 * h, t) - 2.0 * omega(y + h, t) +
                        2.0 * omega(y - h, t) - omega(y - 2.0 * h, t)) /
                       (2.0 * h * h * h);
  return d_t + 8.0 * d_yyy;
}

Mat SolutionEvaluator::bigF(double x, double t) const {
  const Mat tu = tau(x, t);
  return expm(transpose(tu)) + sols_.Q * expm((-1.0) * tu) * sols_.N;
}

Mat SolutionEvaluator::bigE(double x, double t) const {
  const Mat tu = tau(x, t);
  return expm(tu) + sols_.P * expm((-1.0) * tu) * sols_.P;
}

Mat SolutionEvaluator::gamma_mat(double x, double t) const {
  const Mat em = guarded_expm((-x) * trip_.A + (8.0 * t) * a3_, "-Ax+8A^3t");
  const Mat ex = guarded_expm((-x) * trip_.A, "-Ax");
  const Mat qd = transpose(em) * sols_.Q * em;
  const Mat nd = ex * sols_.N * transpose(ex);
  return Mat::identity(trip_.order()) + qd * nd;
}

SolutionEvaluator::UState SolutionEvaluator::make_ustate(double x,
                                                         double t) const {
  const Mat tu = tau(x, t);
  const Mat psi = expm((-1.0) * tu);
  const Mat phi_t = transpose(expm(tu));

  Mat v = transpose(lq_) * psi * ln_;
  Mat vt = solve_lower(lq_, phi_t);
  vt = transpose(solve_lower(ln_, transpose(vt)));

  const bool use_v =
      norm_one(v) <= norm_one(vt) * std::exp(-4.0 * mu_ * opts_.x_switch);
  Mat w = use_v ? v : vt;
  const std::size_t p = trip_.order();
  Mat k = block2(Mat::identity(p), (-1.0) * w, transpose(w), Mat::identity(p));
  return UState{std::move(v), std::move(vt), std::move(w),
                LuFactors(std::move(k))};
}

Mat SolutionEvaluator::h_solve(const UState& st, const Mat& rhs) const {
  const Mat sol = st.lu.solve(stack_on_zeros(rhs));
  return transpose(st.w) * top_block(sol);
}

double SolutionEvaluator::eval_u(double x, double t) const {
  const UState st = make_ustate(x, t);
  return -2.0 * dot(btil_, h_solve(st, ctil_));
}

SolutionEvaluator::VState SolutionEvaluator::make_vstate(double x,
                                                         double t) const {
  const Mat tu = tau(x, t);
  const Mat theta = expm(tu);
  Mat theta_inv = expm((-1.0) * tu);
  const double tr_tau = 2.0 * tr_a_ * x - 8.0 * tr_a3_ * t;

  const bool grow = norm_one(theta) >
                    norm_one(theta_inv) * std::exp(4.0 * mu_ * opts_.x_switch);
  const std::size_t p = trip_.order();
  Mat k;
  if (grow) {
    const Mat g = theta_inv * sols_.P;
    k = block2(Mat::identity(p), (-1.0) * g, g, Mat::identity(p));
  } else {
    k = block2(theta, sols_.P, (-1.0) * sols_.P, theta);
  }
  return VState{grow, std::move(theta_inv), tr_tau, LuFactors(std::move(k))};
}

Mat SolutionEvaluator::e_solve(const VState& st, const Mat& rhs) const {
  const Mat r = st.grow ? st.theta_inv * rhs : rhs;
  return top_block(st.lu.solve(stack_on_zeros(r)));
}

double SolutionEvaluator::log_abs_det_E(const VState& st) const {
  return st.grow ? st.tr_tau + st.lu.log_abs_det()
                 : st.lu.log_abs_det() - st.tr_tau;
}

double SolutionEvaluator::eval_v(double x, double t) const {
  const VState st = make_vstate(x, t);
  return -2.0 * (trip_.C * e_solve(st, trip_.B))(0, 0);
}

double SolutionEvaluator::kernel_K(double x, double y, double t) const {
  const VState st = make_vstate(x, t);
  const Mat w = e_solve(st, trip_.B);
  const Mat ex = guarded_expm((-(y - x)) * trip_.A, "-A(y-x)");
  return (trip_.C * ex * w)(0, 0);
}

double SolutionEvaluator::kernel_K_eform(double x, double y, double t) const {
  const VState st = make_vstate(x, t);
  const Mat ex = guarded_expm((-(y - x)) * trip_.A, "-A(y-x)");
  return (trip_.C * e_solve(st, ex * trip_.B))(0, 0);
}

double SolutionEvaluator::marchenko_residual(double x, double y, double t,
                                             std::size_t panel_cap) const {
  const VState st = make_vstate(x, t);
  // w = e^{Ax} E^{-1} B lets K(x,z) separate as (C e^{-Az}) w, so the double
  // integral collapses to two weighted sums over one set of nodes.
  const Mat w = guarded_expm(x * trip_.A, "Ax") * e_solve(st, trip_.B);
  const Mat t8 = guarded_expm((8.0 * t) * a3_, "8A^3t");
  const Mat gy = guarded_expm((-y) * trip_.A, "-Ay") * t8 * trip_.B;

  const double anorm = norm_one(trip_.A);
  const double width = 2.0 / anorm;
  static const auto gl = gauss_legendre(24);

  std::vector<Mat> rs;      // C e^{-A z_i}
  std::vector<Mat> gs;      // e^{-A z_i} e^{8A^3 t} B
  std::vector<double> wts;  // quadrature weights
  double ref = 0.0;
  for (std::size_t panel = 0;; ++panel) {
    if (panel >= panel_cap) {
      std::ostringstream msg;
      msg << "Marchenko quadrature did not converge within " << panel_cap
          << " panels";
      throw numeric_range_error(msg.str());
    }
    const double a = x + double(panel) * width;
    double panel_max = 0.0;
    std::vector<Mat> prs, pgs;
    std::vector<double> pwts;
    for (std::size_t i = 0; i < gl.first.size(); ++i) {
      const double z = a + (gl.first[i] + 1.0) * 0.5 * width;
      const Mat ez = guarded_expm((-z) * trip_.A, "-Az");
      panel_max = std::max(panel_max, norm_inf(ez));
      prs.push_back(trip_.C * ez);
      pgs.push_back(ez * t8 * trip_.B);
      pwts.push_back(gl.second[i] * 0.5 * width);
    }
    if (panel == 0)
      ref = panel_max;
    else if (panel_max < 1e-16 * ref)
      break;
    for (std::size_t i = 0; i < prs.size(); ++i) {
      rs.push_back(std::move(prs[i]));
      gs.push_back(std::move(pgs[i]));
      wts.push_back(pwts[i]);
    }
  }

  // U = int K(x,z) C e^{-Az} dz, then sum_j w_j (U g_j)(r_j gy).
  Mat u_row(1, trip_.order());
  for (std::size_t i = 0; i < rs.size(); ++i)
    u_row = u_row + (wts[i] * (rs[i] * w)(0, 0)) * rs[i];
  double dbl = 0.0;
  for (std::size_t j = 0; j < rs.size(); ++j)
    dbl += wts[j] * (u_row * gs[j])(0, 0) * (rs[j] * gy)(0, 0);

  const double k_xy =
      (trip_.C * guarded_expm((-y) * trip_.A, "-Ay") * w)(0, 0);
  const double omega_xy =
      (trip_.C * guarded_expm((-x) * trip_.A, "-Ax") * gy)(0, 0);
  return k_xy - omega_xy + dbl;
}

DerivativeBundle SolutionEvaluator::analytic_derivatives(double x,
                                                         double t) const {
  const UState st = make_ustate(x, t);
  // In the frame of h_solve, x- and t-derivatives of H = V + Vt act through
  // alpha = Lq^{-1} A^T Lq:  H_x = 2 S, H_xx = 4 T2, H_xxx = 8 T3, H_t = -8 T3.
  const Mat s = alpha_ * st.vt - transpose(alpha_) * st.v;
  const Mat t2 = alpha2_ * st.vt + transpose(alpha2_) * st.v;
  const Mat t3 = alpha3_ * st.vt - transpose(alpha3_) * st.v;

  const Mat y0 = h_solve(st, ctil_);
  const Mat y1 = h_solve(st, s * y0);
  const Mat y2 = h_solve(st, t2 * y0);
  const Mat y1b = h_solve(st, s * y1);
  const Mat y3 = h_solve(st, t3 * y0);
  const Mat y4 = h_solve(st, t3 * y0 - 3.0 * (t2 * y1) - 3.0 * (s * y2) +
                                  6.0 * (s * y1b));

  DerivativeBundle d;
  d.u = -2.0 * dot(btil_, y0);
  d.u_x = 4.0 * dot(btil_, y1);
  d.u_t = -16.0 * dot(btil_, y3);
  d.u_xx = 8.0 * (dot(btil_, y2) - 2.0 * dot(btil_, y1b));
  d.u_xxx = 16.0 * dot(btil_, y4);
  return d;
}

double SolutionEvaluator::log_abs_det_E(double x, double t) const {
  return log_abs_det_E(make_vstate(x, t));
}

double SolutionEvaluator::logdet_identity_residual(double x, double t,
                                                   double h) const {
  if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");
  const double u = eval_u(x, t);
  const double d2 = (log_abs_det_E(x + h, t) - 2.0 * log_abs_det_E(x, t) +
                     log_abs_det_E(x - h, t)) /
                    (h * h);
  return u * u - d2;
}

double SolutionEvaluator::logdet_printed_form_residual(double x, double t,
                                                       double h) const {
  if (!(h > 0.0)) throw std::invalid_argument("step h must be positive");
  const double ux = analytic_derivatives(x, t).u_x;
  const double d2 = (log_abs_det_E(x + h, t) - 2.0 * log_abs_det_E(x, t) +
                     log_abs_det_E(x - h, t)) /
                    (h * h);
  return ux * ux - d2;
}

std::vector<GridRow> SolutionEvaluator::evaluate_grid(
    const GridSpec& grid) const {
  if (grid.x_count < 1)
    throw std::invalid_argument("grid needs x_count >= 1");
  if (!(grid.x_min <= grid.x_max) ||
      (grid.x_count > 1 && !(grid.x_min < grid.x_max)))
    throw std::invalid_argument("grid needs x_min < x_max");

  std::vector<GridRow> rows;
  rows.reserve(grid.t_values.size() * grid.x_count);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double t : grid.t_values) {
    for (std::size_t i = 0; i < grid.x_count; ++i) {
      const double x =
          grid.x_count == 1
              ? grid.x_min
              : grid.x_min + double(i) * (grid.x_max - grid.x_min) /
                                 double(grid.x_count - 1);
      GridRow row;
      row.x = x;
      row.t = t;
      try {
        const DerivativeBundle d = analytic_derivatives(x, t);
        const double v = eval_v(x, t);
        row.u = d.u;
        row.v = v;
        row.u_minus_v = std::fabs(d.u - v);
        row.pde_residual = d.u_t + d.u_xxx + 6.0 * d.u * d.u * d.u_x;
        row.ok = true;
      } catch (const numeric_range_error&) {
        row.u = row.v = row.u_minus_v = row.pde_residual = nan;
        row.ok = false;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace mkdv
