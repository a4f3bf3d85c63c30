#include "mir/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mir/error.hpp"

namespace mir {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

SplineBasis::SplineBasis(std::vector<double> knots, int degree, int smoothness)
    : knots_(std::move(knots)), degree_(degree), smoothness_(smoothness) {
  if (knots_.size() < 2) throw InvalidArgument("knots", "need at least two knots");
  for (std::size_t j = 0; j < knots_.size(); ++j) {
    if (!std::isfinite(knots_[j])) throw InvalidArgument("knots", "non-finite knot");
    if (j > 0 && !(knots_[j] > knots_[j - 1])) {
      throw InvalidArgument("knots", "must be strictly increasing (index " + std::to_string(j) + ")");
    }
  }
  if (degree_ < 1) throw InvalidArgument("degree", "must be >= 1");
  if (smoothness_ < 0 || smoothness_ > degree_) {
    throw InvalidArgument("smoothness", "must satisfy 0 <= smoothness <= degree");
  }
}

SplineBasis SplineBasis::uniform(double lo, double hi, int segments, int degree, int smoothness) {
  if (segments < 1) throw InvalidArgument("knots", "segment count must be >= 1");
  if (!(hi > lo)) throw InvalidArgument("knots", "domain upper end must exceed lower end");
  std::vector<double> knots(static_cast<std::size_t>(segments) + 1);
  for (int j = 0; j <= segments; ++j) {
    knots[static_cast<std::size_t>(j)] = lo + (hi - lo) * static_cast<double>(j) / segments;
  }
  knots.back() = hi;
  return SplineBasis(std::move(knots), degree, smoothness);
}

int SplineBasis::segment_of(double x) const {
  if (!contains(x)) {
    throw InvalidArgument("x", "value " + std::to_string(x) + " outside spline domain [" +
                                   std::to_string(lower()) + ", " + std::to_string(upper()) + "]");
  }
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
  const auto k = static_cast<int>(it - knots_.begin());
  return std::max(k - 1, 0);
}

Eigen::VectorXd design_row(double x, const SplineBasis& basis) {
  const int seg = basis.segment_of(x);
  const int d = basis.degree();
  Eigen::VectorXd row = Eigen::VectorXd::Zero(basis.size());
  const double t = basis.local(x, seg);
  double power = 1.0;
  for (int k = 0; k <= d; ++k) {
    row(seg * (d + 1) + k) = power;
    power *= t;
  }
  return row;
}

Eigen::MatrixXd design_matrix(std::span<const double> xs, const SplineBasis& basis) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), basis.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = design_row(xs[i], basis).transpose();
  }
  return out;
}

Eigen::MatrixXd continuity_matrix(const SplineBasis& basis) {
  const int b = basis.segments();
  const int d = basis.degree();
  const int rho = basis.smoothness();
  if (b < 2) throw InvalidArgument("knots", "continuity needs at least two segments");

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero((b - 1) * (rho + 1), basis.size());
  for (int j = 0; j + 1 < b; ++j) {
    const double left = basis.width(j);
    const double right = basis.width(j + 1);
    for (int g = 0; g <= rho; ++g) {
      const int row = j * (rho + 1) + g;
      // g-th derivative of segment j at t = 1 ...
      for (int k = g; k <= d; ++k) {
        h(row, j * (d + 1) + k) = factorial(k) / factorial(k - g) / std::pow(left, g);
      }
      // ... minus that of segment j+1 at t = 0.
      h(row, (j + 1) * (d + 1) + g) = -factorial(g) / std::pow(right, g);
    }
  }
  return h;
}

Eigen::MatrixXd penalty_matrix(const SplineBasis& basis) {
  const int d = basis.degree();
  if (d < 2) throw InvalidArgument("degree", "roughness penalty needs degree >= 2");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int j = 0; j < basis.segments(); ++j) {
    const double cube = std::pow(basis.width(j), 3);
    const int off = j * (d + 1);
    for (int k = 2; k <= d; ++k) {
      for (int g = 2; g <= d; ++g) {
        q(off + k, off + g) = static_cast<double>(k * (k - 1) * g * (g - 1)) / (cube * (k + g - 3));
      }
    }
  }
  return q;
}

Eigen::MatrixXd noncross_matrix(const SplineBasis& basis) {
  const int d = basis.degree();
  Eigen::MatrixXd g_mat = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int j = 0; j < basis.segments(); ++j) {
    const int off = j * (d + 1);
    for (int g = 0; g <= d; ++g) {
      for (int k = 0; k <= g; ++k) {
        g_mat(off + g, off + k) = factorial(d - k) / (factorial(d - g) * factorial(g - k));
      }
    }
  }
  return g_mat;
}

double eval_segment(const Eigen::VectorXd& coefficients, const SplineBasis& basis, int segment, double x) {
  const int d = basis.degree();
  const int off = segment * (d + 1);
  const double t = basis.local(x, segment);
  double acc = coefficients(off + d);
  for (int k = d - 1; k >= 0; --k) acc = acc * t + coefficients(off + k);
  return acc;
}

double eval_spline(const Eigen::VectorXd& coefficients, const SplineBasis& basis, double x) {
  if (coefficients.size() != basis.size()) {
    throw InvalidArgument("coefficients", "length " + std::to_string(coefficients.size()) +
                                              " does not match basis size " + std::to_string(basis.size()));
  }
  return eval_segment(coefficients, basis, basis.segment_of(x), x);
}

}  // namespace mir
