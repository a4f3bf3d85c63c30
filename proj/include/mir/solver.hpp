#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mir/kde.hpp"
#include "mir/modal_interval.hpp"
#include "mir/spline.hpp"

namespace mir {

// Joint upper/lower quantile-spline program over c = (c_up, c_low):
//
//   minimize  sum_i w_i J_{p_i}(y_i - (A c)_i) + lambda c' Q c
//   s.t.      H c = 0,  G c >= 0
//
// Stacked vectors are ordered upper-then-lower.
struct MirProblem {
  SplineBasis basis;
  Eigen::SparseMatrix<double> A;  // 2n x 2m, m = b(d+1)
  Eigen::MatrixXd Q;              // 2m x 2m
  Eigen::MatrixXd H;              // 2(b-1)(rho+1) x 2m
  Eigen::MatrixXd G;              // m x 2m, (G~, -G~)
  Eigen::VectorXd p;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  double lambda = 0.0;
  double gamma = 1.0;

  Eigen::Index observations() const noexcept { return y.size() / 2; }
  Eigen::Index coefficients() const noexcept { return Q.rows(); }
};

MirProblem assemble(const Dataset& data, const QuantileLevelSet& levels, std::span<const double> weights,
                    const SplineBasis& basis, double lambda, double gamma = 1.0);

// Pinball loss J_p(t).
double quantile_loss(double t, double p) noexcept;

// argmin_v  w J_p(y - v) + (v - z)^2 / (2 gamma).
double prox_quantile_loss(double z, double p, double y, double w, double gamma) noexcept;

// Componentwise max(z, 0).
Eigen::VectorXd project_nonneg(const Eigen::VectorXd& z);

// Value of the convex objective (constraints not included).
double objective(const MirProblem& problem, const Eigen::VectorXd& c);

// Upper and lower bound curves sharing one basis.
struct FittedBand {
  SplineBasis basis;
  Eigen::VectorXd upper;
  Eigen::VectorXd lower;

  double upper_at(double x) const { return eval_spline(upper, basis, x); }
  double lower_at(double x) const { return eval_spline(lower, basis, x); }
  double midpoint_at(double x) const { return 0.5 * (upper_at(x) + lower_at(x)); }

  // Smallest upper - lower over `points` evenly spaced samples of the domain.
  double min_gap(int points = 1001) const;
  // max(|H~ c_up|_inf, |H~ c_low|_inf).
  double continuity_violation() const;
};

struct AdmmState {
  Eigen::VectorXd c;
  Eigen::VectorXd z1;  // auxiliary copy of A c
  Eigen::VectorXd z2;  // auxiliary copy of G c
  Eigen::VectorXd u1;  // scaled duals
  Eigen::VectorXd u2;
  // A'z1 and A'u1, carried between iterations; valid for states produced by
  // initial_state() and iterate().
  Eigen::VectorXd at_z1;
  Eigen::VectorXd at_u1;
  int iteration = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct AdmmOptions {
  int iterations = 1000;
  // Stop early once both residuals fall below this; <= 0 disables.
  double tolerance = 0.0;
  // When the bands still cross on the check grid after `iterations`, keep
  // iterating (checked every 100 steps) for at most this many more.
  int feasibility_iterations = 20000;
};

inline constexpr double kGapTolerance = 1e-6;

struct AdmmResult {
  FittedBand band;
  int iterations = 0;
  int extra_iterations = 0;  // spent restoring non-crossing past the budget
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  double objective = 0.0;
  double min_gap = 0.0;
  // Non-empty when the sufficient non-crossing condition did not translate
  // into a non-negative gap on the check grid (nothing is clipped).
  std::string diagnostic;
};

// ADMM iteration for a fixed problem. The KKT system of the coefficient
// update is factored once in the constructor (null-space method: QR of H',
// Cholesky of the reduced Hessian).
class AdmmSolver {
 public:
  explicit AdmmSolver(const MirProblem& problem);

  AdmmState initial_state() const;
  void iterate(AdmmState& state) const;

  // Iterates work on responses shifted by this offset (their median), which
  // makes the result translation-equivariant even before convergence.
  double offset() const noexcept { return offset_; }
  // State coefficients mapped back to the original response scale.
  Eigen::VectorXd coefficients(const AdmmState& state) const;

  const MirProblem& problem() const noexcept { return problem_; }

 private:
  const MirProblem& problem_;
  Eigen::VectorXd y_;       // centered responses
  double offset_ = 0.0;
  // c = basis_ * (reduced_ * (basis_' * (A'v1 + G'v2))), basis_ spanning ker H.
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd reduced_;
  // Rows of A as a start column plus a fixed-width run of values.
  int width_ = 0;
  std::vector<Eigen::Index> row_start_;
  std::vector<double> row_values_;
  Eigen::SparseMatrix<double> ata_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> g_;
  Eigen::SparseMatrix<double> gt_;

  template <int Width>
  void loss_pass(AdmmState& s, Eigen::VectorXd& at_z1, double& r1_sq) const;
};

AdmmResult admm_fit(const MirProblem& problem, const AdmmOptions& options = {});

}  // namespace mir
