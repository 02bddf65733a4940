#pragma once

#include <Eigen/Dense>

#include "splinequad/quadrature.hpp"
#include "splinequad/splines.hpp"

namespace splinequad {

/// Precomputed data for measuring how far a rule is from integrating a spline
/// space exactly: the exact basis integrals and the Cholesky factor of the
/// basis Gram (mass) matrix, whose inverse defines the dual norm.
struct LossContext {
  SplineSpace space;
  Eigen::VectorXd exact_integrals;
  Eigen::MatrixXd gram;
  Eigen::LLT<Eigen::MatrixXd> gram_factor;
};

/// Assembles the Gram matrix with element-wise Gauss quadrature sharp enough
/// to be exact for products of basis functions, and factors it.
LossContext build_loss_context(const SplineSpace& space);

/// Signed quadrature errors per basis function: r_i = I(B_i) - sum_m w_m B_i(x_m).
Eigen::VectorXd residuals(const LossContext& context, const QuadratureRule& rule);

/// Dual-norm loss L = sqrt(r^T M^{-1} r): the worst-case quadrature error over
/// splines of unit L2 norm.
double loss_value(const LossContext& context, const QuadratureRule& rule);

/// L^2 = r^T M^{-1} r, the quantity the optimizer descends.
double loss_squared(const LossContext& context, const QuadratureRule& rule);

/// Gradient of a loss with respect to every point and weight of the rule.
struct LossGradient {
  Eigen::VectorXd d_points;
  Eigen::VectorXd d_weights;
};

/// Gradient of L^2.
LossGradient loss_squared_gradient(const LossContext& context, const QuadratureRule& rule);

/// Gradient of L = sqrt(L^2); falls back to the L^2 gradient once L < 1e-8,
/// where the 1/L factor would blow up.
LossGradient loss_gradient(const LossContext& context, const QuadratureRule& rule);

/// Everything the optimizer needs from one pass over the rule.
struct LossEvaluation {
  double squared = 0.0;           ///< L^2
  Eigen::VectorXd residual;       ///< r
  LossGradient gradient;          ///< gradient of L^2
  double max_rel_residual = 0.0;  ///< max_i |r_i| / I(B_i)
};
LossEvaluation evaluate_loss(const LossContext& context, const QuadratureRule& rule);

/// L2 norm sqrt(c^T M c) of the spline with coefficients c.
double spline_l2_norm(const LossContext& context, const Eigen::VectorXd& coefficients);

/// Coefficients of the unit-norm spline whose quadrature error attains the
/// loss: M^{-1} r scaled to unit L2 norm.
Eigen::VectorXd worst_case_spline(const LossContext& context, const QuadratureRule& rule);

}  // namespace splinequad
