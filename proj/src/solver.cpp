#include "mir/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "mir/error.hpp"

namespace mir {

namespace {

Eigen::MatrixXd block_diag2(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * m.rows(), 2 * m.cols());
  out.topLeftCorner(m.rows(), m.cols()) = m;
  out.bottomRightCorner(m.rows(), m.cols()) = m;
  return out;
}

double median_of(const Eigen::VectorXd& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  const std::size_t mid = s.size() / 2;
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(mid), s.end());
  double m = s[mid];
  if (s.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace

MirProblem assemble(const Dataset& data, const QuantileLevelSet& levels, std::span<const double> weights,
                    const SplineBasis& basis, double lambda, double gamma) {
  data.validate();
  const auto n = static_cast<Eigen::Index>(data.size());
  if (levels.p_up.size() != data.size() || levels.p_low.size() != data.size()) {
    throw InvalidArgument("levels", "need one (p_low, p_up) pair per observation");
  }
  if (weights.size() != data.size()) throw InvalidArgument("weights", "need one weight per observation");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda", "must be positive and finite");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma", "must be positive and finite");

  const int d = basis.degree();
  const Eigen::Index m = basis.size();

  MirProblem pr{basis, {}, {}, {}, {}, {}, {}, {}, lambda, gamma};
  pr.p.resize(2 * n);
  pr.y.resize(2 * n);
  pr.w.resize(2 * n);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(2 * n * (d + 1)));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const double x = data.x[iu];
    if (!basis.contains(x)) {
      throw InvalidArgument("x", "observation " + std::to_string(i) + " (x=" + std::to_string(x) +
                                     ") lies outside the knot range");
    }
    for (double p : {levels.p_up[iu], levels.p_low[iu]}) {
      if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("levels", "quantile level outside (0,1) at observation " + std::to_string(i));
      }
    }
    if (!(weights[iu] > 0.0) || !std::isfinite(weights[iu])) {
      throw InvalidArgument("weights", "weight must be positive at observation " + std::to_string(i));
    }
    const int seg = basis.segment_of(x);
    const double t = basis.local(x, seg);
    double power = 1.0;
    for (int k = 0; k <= d; ++k) {
      const Eigen::Index col = seg * (d + 1) + k;
      entries.emplace_back(i, col, power);
      entries.emplace_back(n + i, m + col, power);
      power *= t;
    }
    pr.p(i) = levels.p_up[iu];
    pr.p(n + i) = levels.p_low[iu];
    pr.y(i) = pr.y(n + i) = data.y[iu];
    pr.w(i) = pr.w(n + i) = weights[iu];
  }
  pr.A.resize(2 * n, 2 * m);
  pr.A.setFromTriplets(entries.begin(), entries.end());

  pr.Q = block_diag2(penalty_matrix(basis));
  pr.H = block_diag2(continuity_matrix(basis));
  const Eigen::MatrixXd g = noncross_matrix(basis);
  pr.G.resize(m, 2 * m);
  pr.G << g, -g;
  return pr;
}

double quantile_loss(double t, double p) noexcept { return t >= 0.0 ? p * t : -(1.0 - p) * t; }

double prox_quantile_loss(double z, double p, double y, double w, double gamma) noexcept {
  const double r = y - z;
  if (r >= gamma * p * w) return z + gamma * p * w;
  if (r <= -gamma * (1.0 - p) * w) return z - gamma * (1.0 - p) * w;
  return y;
}

Eigen::VectorXd project_nonneg(const Eigen::VectorXd& z) { return z.cwiseMax(0.0); }

double objective(const MirProblem& problem, const Eigen::VectorXd& c) {
  const Eigen::VectorXd fitted = problem.A * c;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < fitted.size(); ++i) {
    loss += problem.w(i) * quantile_loss(problem.y(i) - fitted(i), problem.p(i));
  }
  return loss + problem.lambda * c.dot(problem.Q * c);
}

double FittedBand::min_gap(int points) const {
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    const double x =
        k + 1 == points ? basis.upper() : basis.lower() + (basis.upper() - basis.lower()) * k / (points - 1);
    gap = std::min(gap, upper_at(x) - lower_at(x));
  }
  return gap;
}

double FittedBand::continuity_violation() const {
  if (basis.segments() < 2) return 0.0;
  const Eigen::MatrixXd h = continuity_matrix(basis);
  return std::max((h * upper).cwiseAbs().maxCoeff(), (h * lower).cwiseAbs().maxCoeff());
}

AdmmSolver::AdmmSolver(const MirProblem& problem) : problem_(problem) {
  const Eigen::Index m2 = problem.coefficients();
  const Eigen::Index r = problem.H.rows();
  const Eigen::Index n2 = problem.y.size();

  offset_ = median_of(problem.y.head(n2 / 2));
  y_ = problem.y.array() - offset_;
  const Eigen::SparseMatrix<double, Eigen::RowMajor> a = problem.A;
  const Eigen::Index rows = a.rows();
  row_start_.assign(static_cast<std::size_t>(rows), 0);
  std::vector<Eigen::Index> row_end(static_cast<std::size_t>(rows), 0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, i);
    if (!it) continue;
    row_start_[static_cast<std::size_t>(i)] = it.col();
    for (; it; ++it) row_end[static_cast<std::size_t>(i)] = it.col() + 1;
    width_ = std::max(width_, static_cast<int>(row_end[static_cast<std::size_t>(i)] - row_start_[static_cast<std::size_t>(i)]));
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    auto& start = row_start_[static_cast<std::size_t>(i)];
    start = std::min(start, m2 - width_);
  }
  row_values_.assign(static_cast<std::size_t>(rows * width_), 0.0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, i); it; ++it) {
      row_values_[static_cast<std::size_t>(i * width_ + it.col() - row_start_[static_cast<std::size_t>(i)])] =
          it.value();
    }
  }
  g_ = problem.G.sparseView();
  gt_ = g_.transpose();

  // Coefficient update: minimize lambda c'Qc + (|Ac - v1|^2 + |Gc - v2|^2) / (2 gamma)
  // subject to Hc = 0, i.e. the KKT system
  //   [2 gamma lambda Q + A'A + G'G   H'] [c ]   [A'v1 + G'v2]
  //   [H                              0 ] [nu] = [0          ].
  ata_ = problem.A.transpose() * problem.A;
  ata_.prune(0.0);
  const Eigen::MatrixXd hessian = 2.0 * problem.gamma * problem.lambda * problem.Q + Eigen::MatrixXd(ata_) +
                                  problem.G.transpose() * problem.G;

  // The KKT matrix is nonsingular iff H has full row rank and the Hessian is
  // positive definite on ker H.
  if (r > 0) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(problem.H.transpose());
    if (qr.rank() < r) {
      throw NumericalError("rank-deficient constraints: continuity rows are linearly dependent");
    }
    const Eigen::MatrixXd q = qr.householderQ();
    basis_ = q.rightCols(m2 - r);
  } else {
    basis_ = Eigen::MatrixXd::Identity(m2, m2);
  }
  const Eigen::MatrixXd reduced = basis_.transpose() * hessian * basis_;
  const Eigen::LLT<Eigen::MatrixXd> llt(reduced);
  const double scale = reduced.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-10 * std::sqrt(std::max(scale, 1e-300))) {
    throw NumericalError("rank-deficient constraints: KKT matrix of the coefficient update is singular");
  }
  reduced_ = llt.solve(Eigen::MatrixXd::Identity(reduced.rows(), reduced.cols()));
  if (!reduced_.allFinite()) throw NumericalError("rank-deficient constraints: non-finite KKT solve");
}

AdmmState AdmmSolver::initial_state() const {
  AdmmState s;
  s.c = Eigen::VectorXd::Zero(problem_.coefficients());
  s.z1 = Eigen::VectorXd::Zero(problem_.y.size());
  s.u1 = Eigen::VectorXd::Zero(problem_.y.size());
  s.z2 = Eigen::VectorXd::Zero(problem_.G.rows());
  s.u2 = Eigen::VectorXd::Zero(problem_.G.rows());
  s.at_z1 = Eigen::VectorXd::Zero(problem_.coefficients());
  s.at_u1 = Eigen::VectorXd::Zero(problem_.coefficients());
  return s;
}

template <int Width>
void AdmmSolver::loss_pass(AdmmState& s, Eigen::VectorXd& at_z1, double& r1_sq) const {
  const MirProblem& pr = problem_;
  const int width = Width > 0 ? Width : width_;
  const double* c = s.c.data();
  double* z1 = s.z1.data();
  double* u1 = s.u1.data();
  double* acc = at_z1.data();
  const double* p = pr.p.data();
  const double* y = y_.data();
  const double* w = pr.w.data();
  const Eigen::Index rows = s.z1.size();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double* a = row_values_.data() + i * width;
    const Eigen::Index col = row_start_[static_cast<std::size_t>(i)];
    double ac = 0.0;
    for (int k = 0; k < width; ++k) ac += a[k] * c[col + k];
    const double z_new = prox_quantile_loss(ac + u1[i], p[i], y[i], w[i], pr.gamma);
    const double r = ac - z_new;
    z1[i] = z_new;
    u1[i] += r;
    r1_sq += r * r;
    for (int k = 0; k < width; ++k) acc[col + k] += a[k] * z_new;
  }
}

void AdmmSolver::iterate(AdmmState& s) const {
  const MirProblem& pr = problem_;

  const Eigen::VectorXd rhs = s.at_z1 - s.at_u1 + gt_ * (s.z2 - s.u2);
  const Eigen::VectorXd theta = reduced_ * (basis_.transpose() * rhs);
  s.c.noalias() = basis_ * theta;

  // One pass over the loss rows: A c, prox, dual update and A'z1. A'u1
  // follows from u1 += Ac - z1 without touching the rows again.
  Eigen::VectorXd at_z1 = Eigen::VectorXd::Zero(s.c.size());
  double r1_sq = 0.0;
  if (width_ == 4) {
    loss_pass<4>(s, at_z1, r1_sq);
  } else {
    loss_pass<0>(s, at_z1, r1_sq);
  }
  s.at_u1 += ata_ * s.c - at_z1;

  const Eigen::VectorXd gc = g_ * s.c;
  Eigen::VectorXd z2_new = project_nonneg(gc + s.u2);
  s.dual_residual = (at_z1 - s.at_z1 + gt_ * (z2_new - s.z2)).norm() / pr.gamma;
  s.at_z1.swap(at_z1);
  s.z2.swap(z2_new);
  const Eigen::VectorXd r2 = gc - s.z2;
  s.u2 += r2;
  s.primal_residual = std::sqrt(r1_sq + r2.squaredNorm());
  ++s.iteration;

  if (!std::isfinite(s.primal_residual) || !std::isfinite(s.dual_residual) || !s.c.allFinite()) {
    throw NumericalError("non-finite ADMM iterate at iteration " + std::to_string(s.iteration));
  }
}

Eigen::VectorXd AdmmSolver::coefficients(const AdmmState& state) const {
  Eigen::VectorXd c = state.c;
  const int stride = problem_.basis.degree() + 1;
  for (Eigen::Index k = 0; k < c.size(); k += stride) c(k) += offset_;
  return c;
}

AdmmResult admm_fit(const MirProblem& problem, const AdmmOptions& options) {
  if (options.iterations < 1) throw InvalidArgument("iterations", "must be >= 1");
  const AdmmSolver solver(problem);
  AdmmState state = solver.initial_state();

  AdmmResult out{FittedBand{problem.basis, {}, {}}, 0, 0, {}, {}, 0.0, 0.0, {}};
  out.primal_residuals.reserve(static_cast<std::size_t>(options.iterations));
  out.dual_residuals.reserve(static_cast<std::size_t>(options.iterations));
  const Eigen::Index m = problem.basis.size();
  const auto step = [&] {
    solver.iterate(state);
    out.primal_residuals.push_back(state.primal_residual);
    out.dual_residuals.push_back(state.dual_residual);
  };
  const auto take = [&] {
    const Eigen::VectorXd c = solver.coefficients(state);
    out.band.upper = c.head(m);
    out.band.lower = c.tail(m);
    out.min_gap = out.band.min_gap();
  };
  for (int it = 0; it < options.iterations; ++it) {
    step();
    if (options.tolerance > 0.0 && state.primal_residual < options.tolerance &&
        state.dual_residual < options.tolerance) {
      break;
    }
  }
  take();
  // Aim below the reporting tolerance so other check grids agree.
  while (out.min_gap < -0.1 * kGapTolerance && out.extra_iterations < options.feasibility_iterations) {
    for (int k = 0; k < 100; ++k) step();
    out.extra_iterations += 100;
    take();
  }

  const Eigen::VectorXd c = solver.coefficients(state);
  out.iterations = state.iteration;
  out.objective = objective(problem, c);
  if (out.min_gap < -kGapTolerance) {
    out.diagnostic = "fitted bounds cross on the check grid (min gap " + std::to_string(out.min_gap) +
                     "); ADMM has not converged to the non-crossing constraint";
  }
  return out;
}

}  // namespace mir
