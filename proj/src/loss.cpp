#include "splinequad/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "accumulate.hpp"

namespace splinequad {

namespace {

// Smallest loss at which the 1/L chain-rule factor is still trustworthy.
constexpr double kSqrtGradientFloor = 1e-8;

Eigen::VectorXd solve_dual(const LossContext& context, const Eigen::VectorXd& r) {
  return context.gram_factor.solve(r);
}

}  // namespace

LossContext build_loss_context(const SplineSpace& space) {
  LossContext context;
  context.space = space;
  context.exact_integrals = basis_integrals(space);

  const Eigen::Index n = space.dimension();
  context.gram = Eigen::MatrixXd::Zero(n, n);
  // degree+1 Gauss points per element integrate products of two basis
  // functions (local degree 2*degree) exactly.
  const QuadratureRule assembly = elementwise_gauss(space.degree + 1, space.partition);
  for (Eigen::Index m = 0; m < assembly.count(); ++m) {
    const LocalBasis local = eval_basis_local(space, assembly.points[m]);
    const double w = assembly.weights[m];
    for (int a = 0; a <= space.degree; ++a) {
      const double wa = w * local.values[a];
      for (int b = 0; b <= space.degree; ++b) {
        context.gram(local.first_index + a, local.first_index + b) += wa * local.values[b];
      }
    }
  }

  context.gram_factor.compute(context.gram);
  if (context.gram_factor.info() != Eigen::Success) {
    throw std::runtime_error("basis Gram matrix is not positive definite");
  }
  return context;
}

Eigen::VectorXd residuals(const LossContext& context, const QuadratureRule& rule) {
  const Eigen::Index n = context.space.dimension();
  const int p = context.space.degree;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(n);
  for (Eigen::Index m = 0; m < rule.count(); ++m) {
    const LocalBasis local = eval_basis_local(context.space, rule.points[m]);
    const double w = rule.weights[m];
    for (int j = 0; j <= p; ++j) {
      const Eigen::Index i = local.first_index + j;
      const double term = w * local.values[j] - comp[i];
      const double t = acc[i] + term;
      comp[i] = (t - acc[i]) - term;
      acc[i] = t;
    }
  }
  return context.exact_integrals - acc;
}

double loss_squared(const LossContext& context, const QuadratureRule& rule) {
  const Eigen::VectorXd r = residuals(context, rule);
  return std::max(r.dot(solve_dual(context, r)), 0.0);
}

double loss_value(const LossContext& context, const QuadratureRule& rule) {
  return std::sqrt(loss_squared(context, rule));
}

LossGradient loss_squared_gradient(const LossContext& context, const QuadratureRule& rule) {
  return evaluate_loss(context, rule).gradient;
}

LossGradient loss_gradient(const LossContext& context, const QuadratureRule& rule) {
  const LossEvaluation eval = evaluate_loss(context, rule);
  const double loss = std::sqrt(std::max(eval.squared, 0.0));
  LossGradient grad = eval.gradient;
  if (loss >= kSqrtGradientFloor) {
    grad.d_points /= 2.0 * loss;
    grad.d_weights /= 2.0 * loss;
  }
  return grad;
}

LossEvaluation evaluate_loss(const LossContext& context, const QuadratureRule& rule) {
  const Eigen::Index n = context.space.dimension();
  const int p = context.space.degree;
  const Eigen::Index q = rule.count();
  const int order = std::min(1, p);

  Eigen::MatrixXd values(p + 1, q);
  Eigen::MatrixXd slopes(p + 1, q);
  Eigen::VectorXi first(q);
  Eigen::MatrixXd local(order + 1, p + 1);
  for (Eigen::Index m = 0; m < q; ++m) {
    const int span = detail::find_span(p, context.space.clamped_knots, rule.points[m]);
    detail::basis_derivatives(p, context.space.clamped_knots, span, rule.points[m], order,
                              local);
    first[m] = span - p;
    values.col(m) = local.row(0).transpose();
    if (order > 0) {
      slopes.col(m) = local.row(1).transpose();
    } else {
      slopes.col(m).setZero();
    }
  }

  LossEvaluation eval;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(n);
  for (Eigen::Index m = 0; m < q; ++m) {
    const double w = rule.weights[m];
    for (int j = 0; j <= p; ++j) {
      const Eigen::Index i = first[m] + j;
      const double term = w * values(j, m) - comp[i];
      const double t = acc[i] + term;
      comp[i] = (t - acc[i]) - term;
      acc[i] = t;
    }
  }
  eval.residual = context.exact_integrals - acc;

  const Eigen::VectorXd dual = solve_dual(context, eval.residual);
  eval.squared = std::max(eval.residual.dot(dual), 0.0);

  eval.gradient.d_points.resize(q);
  eval.gradient.d_weights.resize(q);
  for (Eigen::Index m = 0; m < q; ++m) {
    double slope_sum = 0.0;
    double value_sum = 0.0;
    for (int j = 0; j <= p; ++j) {
      slope_sum += dual[first[m] + j] * slopes(j, m);
      value_sum += dual[first[m] + j] * values(j, m);
    }
    eval.gradient.d_points[m] = -2.0 * rule.weights[m] * slope_sum;
    eval.gradient.d_weights[m] = -2.0 * value_sum;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    eval.max_rel_residual = std::max(
        eval.max_rel_residual, std::abs(eval.residual[i]) / context.exact_integrals[i]);
  }
  return eval;
}

double spline_l2_norm(const LossContext& context, const Eigen::VectorXd& coefficients) {
  if (coefficients.size() != context.space.dimension()) {
    throw std::invalid_argument("coefficient count must match the space dimension");
  }
  return std::sqrt(std::max(coefficients.dot(context.gram * coefficients), 0.0));
}

Eigen::VectorXd worst_case_spline(const LossContext& context, const QuadratureRule& rule) {
  const Eigen::VectorXd r = residuals(context, rule);
  const Eigen::VectorXd dual = solve_dual(context, r);
  const double loss = std::sqrt(std::max(r.dot(dual), 0.0));
  if (loss < 1e-14) {  // residuals are roundoff; normalizing them is meaningless
    throw std::runtime_error("rule integrates the space exactly; no worst case exists");
  }
  return dual / loss;
}

}  // namespace splinequad
