#pragma once

#include <Eigen/Dense>

#include <vector>

namespace splinequad {

/// Largest polynomial degree the basis kernels accept (bounds stack scratch).
inline constexpr int kMaxDegree = 32;

/// Strictly increasing breakpoints u_0 < ... < u_ne spanning [0, 1].
struct Partition {
  Eigen::VectorXd knots;

  Eigen::Index element_count() const { return knots.size() - 1; }
  double element_length(Eigen::Index j) const { return knots[j + 1] - knots[j]; }
};

/// ne equal-length elements on [0, 1].
Partition uniform_partition(Eigen::Index element_count);

/// Validates endpoints and strict monotonicity.
Partition make_partition(Eigen::VectorXd knots);

/// Univariate B-spline space on [0, 1] over an open (clamped) knot vector.
///
/// The clamped knot vector repeats 0 and 1 (degree+1) times and each interior
/// breakpoint according to its smoothness: multiplicity m gives C^(degree-m)
/// continuity there.
struct SplineSpace {
  int degree = 0;
  int continuity = 0;  ///< smoothness at interior breakpoints (uniform-multiplicity spaces)
  Partition partition;
  Eigen::VectorXd clamped_knots;

  Eigen::Index dimension() const { return clamped_knots.size() - degree - 1; }
};

/// Space with the same continuity at every interior breakpoint.
SplineSpace make_space(int degree, int continuity, Partition partition);

/// Space with a prescribed multiplicity (1..degree) per interior breakpoint.
/// `continuity` is set to degree minus the largest multiplicity.
SplineSpace make_space_with_multiplicities(int degree, Partition partition,
                                           const std::vector<int>& interior_multiplicities);

/// Index i of the knot span [xi_i, xi_{i+1}) containing x; x == 1 maps to the
/// last non-empty span.
int find_span(const SplineSpace& space, double x);

/// The degree+1 basis functions that are non-zero on the span containing x.
struct LocalBasis {
  int first_index = 0;      ///< global index of the first non-zero basis function
  Eigen::VectorXd values;   ///< size degree+1
};
LocalBasis eval_basis_local(const SplineSpace& space, double x);

/// Row r holds the r-th derivatives of the local non-zero basis functions.
struct LocalBasisDerivatives {
  int first_index = 0;
  Eigen::MatrixXd derivatives;  ///< (max_order+1) x (degree+1)
};
LocalBasisDerivatives eval_basis_derivatives_local(const SplineSpace& space, double x,
                                                   int max_order);

/// All dimension() basis values at x (zeros outside the active span).
Eigen::VectorXd eval_basis(const SplineSpace& space, double x);

/// (max_order+1) x dimension() matrix; row r holds r-th derivatives at x.
Eigen::MatrixXd eval_basis_derivatives(const SplineSpace& space, double x, int max_order);

/// Exact integral of basis function i over [0, 1]:
/// (xi_{i+degree+1} - xi_i) / (degree + 1).
double basis_integral(const SplineSpace& space, Eigen::Index i);

/// All basis integrals; entries are positive and sum to 1.
Eigen::VectorXd basis_integrals(const SplineSpace& space);

/// Planar B-spline curve over a clamped knot vector.
struct BSplineCurve {
  int degree = 0;
  Eigen::VectorXd clamped_knots;
  Eigen::Matrix<double, Eigen::Dynamic, 2> control_points;

  Eigen::Index dimension() const { return clamped_knots.size() - degree - 1; }
};

/// Point on the curve with first-derivative magnitude and unsigned curvature.
struct CurvePoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d first_derivative = Eigen::Vector2d::Zero();
  Eigen::Vector2d second_derivative = Eigen::Vector2d::Zero();
  double jacobian = 0.0;   ///< |C'(x)|
  double curvature = 0.0;  ///< |C'(x) x C''(x)| / |C'(x)|^3
};

/// Evaluates position, derivatives, jacobian, and curvature at x in [0, 1].
/// Throws if the parameterization is singular (|C'| ~ 0) at x.
CurvePoint eval_curve(const BSplineCurve& curve, double x);

namespace detail {

/// Span search over a bare clamped knot vector.
int find_span(int degree, const Eigen::VectorXd& knots, double x);

/// Non-zero basis values on `span`; writes degree+1 entries to `out`.
void basis_values(int degree, const Eigen::VectorXd& knots, int span, double x, double* out);

/// Non-zero basis values and derivatives up to `max_order` on `span`;
/// `out` must be (max_order+1) x (degree+1).
void basis_derivatives(int degree, const Eigen::VectorXd& knots, int span, double x,
                       int max_order, Eigen::Ref<Eigen::MatrixXd> out);

}  // namespace detail

}  // namespace splinequad
