#pragma once

#include <Eigen/Dense>

#include "splinequad/splines.hpp"

namespace splinequad {

/// Points and weights on [0, 1]; points ascend strictly, weights sum to the
/// measure of the domain (1).
struct QuadratureRule {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;

  Eigen::Index count() const { return points.size(); }
};

/// Throws if points leave (0, 1), ordering breaks, sizes mismatch, or the
/// weight sum strays from 1 by more than `weight_sum_tol`.
void validate_rule(const QuadratureRule& rule, double weight_sum_tol = 1e-12);

/// Minimal number of points that can integrate a spline space of the given
/// degree and continuity on ne elements exactly:
/// ceil((degree + free_dofs + 1) / 2) with free_dofs = (ne-1)(degree-continuity).
int optimal_point_count(int degree, int continuity, Eigen::Index element_count);

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n-1.
QuadratureRule gauss_legendre(int point_count);

/// Element-wise Gauss rule: the n-point Gauss-Legendre rule scaled into every
/// element of the partition.
QuadratureRule elementwise_gauss(int points_per_element, const Partition& partition);

/// Sum of f over the rule: sum_m w_m f(x_m).
template <typename F>
double apply_rule(const QuadratureRule& rule, F&& f) {
  double acc = 0.0;
  for (Eigen::Index m = 0; m < rule.count(); ++m) {
    acc += rule.weights[m] * f(rule.points[m]);
  }
  return acc;
}

/// Quadrature of every basis function of `space` against its exact integral.
struct ExactnessReport {
  Eigen::VectorXd errors;        ///< signed absolute errors per basis function
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;    ///< relative to each exact basis integral
  Eigen::Index worst_index = 0;  ///< basis index attaining the max relative error
};
ExactnessReport verify_exactness(const QuadratureRule& rule, const SplineSpace& space);

/// Point-count comparison for integrating S_{p-2}^{2p} mass/stiffness
/// integrands on a tensor-product grid of ne^dim elements.
struct SavingsRow {
  int degree = 0;
  Eigen::Index element_count = 0;
  int space_dim = 1;
  long long elementwise_points = 0;  ///< (p+1)^dim per element, all elements
  long long optimal_points = 0;      ///< optimal univariate count to the dim-th power
  double savings = 0.0;              ///< 1 - optimal/elementwise
};
SavingsRow savings_row(int degree, Eigen::Index element_count, int space_dim);

}  // namespace splinequad
