#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mir {

// Knots xi_0 < ... < xi_b, polynomial degree d and smoothness rho (0 <= rho <= d).
//
// A spline is stored per segment in normalized local powers:
//   s(x) = sum_k c_k^<j> t^k,  t = (x - xi_{j-1}) / Delta_j  on segment j,
// with coefficients laid out segment-major: (c_0^<1> .. c_d^<1>, c_0^<2> ..).
// Segment j owns (xi_{j-1}, xi_j]; the first segment also owns xi_0.
class SplineBasis {
 public:
  SplineBasis(std::vector<double> knots, int degree, int smoothness);

  static SplineBasis uniform(double lo, double hi, int segments, int degree = 3, int smoothness = 2);

  const std::vector<double>& knots() const noexcept { return knots_; }
  int degree() const noexcept { return degree_; }
  int smoothness() const noexcept { return smoothness_; }
  int segments() const noexcept { return static_cast<int>(knots_.size()) - 1; }
  double width(int segment) const { return knots_[segment + 1] - knots_[segment]; }
  double lower() const noexcept { return knots_.front(); }
  double upper() const noexcept { return knots_.back(); }
  bool contains(double x) const noexcept { return x >= lower() && x <= upper(); }

  // Number of coefficients, b(d+1).
  int size() const noexcept { return segments() * (degree_ + 1); }

  // Zero-based segment index owning x; throws InvalidArgument outside the knots.
  int segment_of(double x) const;

  // Local coordinate t in [0, 1] of x within `segment`.
  double local(double x, int segment) const { return (x - knots_[segment]) / width(segment); }

 private:
  std::vector<double> knots_;
  int degree_;
  int smoothness_;
};

// Row a with s(x) = a . c.
Eigen::VectorXd design_row(double x, const SplineBasis& basis);

// Design matrix with one design_row per entry of xs.
Eigen::MatrixXd design_matrix(std::span<const double> xs, const SplineBasis& basis);

// (b-1)(rho+1) x b(d+1); H c = 0 iff derivatives 0..rho match at every interior knot.
Eigen::MatrixXd continuity_matrix(const SplineBasis& basis);

// Block-diagonal Q with c' Q c equal to the integral of s''(x)^2 over the knots.
Eigen::MatrixXd penalty_matrix(const SplineBasis& basis);

// Block-diagonal G; G (c_up - c_low) >= 0 implies s_up >= s_low everywhere
// (a sufficient, not necessary, condition).
Eigen::MatrixXd noncross_matrix(const SplineBasis& basis);

// Evaluates the segment polynomial owning x (Horner on the local block).
double eval_spline(const Eigen::VectorXd& coefficients, const SplineBasis& basis, double x);

// Evaluates the polynomial of a given segment, allowing x on either closed end.
double eval_segment(const Eigen::VectorXd& coefficients, const SplineBasis& basis, int segment, double x);

}  // namespace mir
