#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "splinequad/loss.hpp"

#include "oracles.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace splinequad;

namespace {

QuadratureRule random_rule(int count, std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  Eigen::VectorXd points(count);
  for (int m = 0; m < count; ++m) points[m] = unif(rng);
  std::sort(points.data(), points.data() + count);
  Eigen::VectorXd weights(count);
  for (int m = 0; m < count; ++m) weights[m] = unif(rng);
  weights /= weights.sum();
  QuadratureRule rule;
  rule.points = points;
  rule.weights = weights;
  return rule;
}

}  // namespace

TEST_CASE("gram matrix of hats on two elements") {
  const LossContext ctx = build_loss_context(make_space(1, 0, uniform_partition(2)));
  Eigen::MatrixXd expected(3, 3);
  expected << 1.0 / 6.0, 1.0 / 12.0, 0.0,
              1.0 / 12.0, 1.0 / 3.0, 1.0 / 12.0,
              0.0, 1.0 / 12.0, 1.0 / 6.0;
  CHECK(ctx.gram.isApprox(expected, 1e-14));
  CHECK(ctx.exact_integrals.isApprox(basis_integrals(ctx.space), 1e-15));
  CHECK(ctx.gram.isApprox(ctx.gram.transpose(), 1e-15));
}

TEST_CASE("gram matrices are SPD across spaces") {
  for (int d : {2, 4, 7}) {
    for (int k : {0, d - 1}) {
      const LossContext ctx = build_loss_context(make_space(d, k, uniform_partition(5)));
      const Eigen::VectorXd eigs =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ctx.gram).eigenvalues();
      CHECK(eigs.minCoeff() > 0.0);
      CHECK(ctx.gram_factor.info() == Eigen::Success);
    }
  }
}

TEST_CASE("midpoint rule on Bernstein quadratics: hand-computed residuals") {
  // I(B_i) = 1/3 each; values at 1/2 are (1/4, 1/2, 1/4)
  const LossContext ctx = build_loss_context(make_space(2, 1, uniform_partition(1)));
  QuadratureRule rule;
  rule.points = Eigen::VectorXd::Constant(1, 0.5);
  rule.weights = Eigen::VectorXd::Constant(1, 1.0);
  const Eigen::VectorXd r = residuals(ctx, rule);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
  CHECK(r[1] == doctest::Approx(-1.0 / 6.0).epsilon(1e-13));
  CHECK(r[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
  CHECK(loss_squared(ctx, rule) == doctest::Approx(r.dot(ctx.gram_factor.solve(r))));
  CHECK(loss_value(ctx, rule) == doctest::Approx(std::sqrt(loss_squared(ctx, rule))));
}

TEST_CASE("exact rules have zero loss") {
  const SplineSpace space = make_space(3, 1, uniform_partition(3));
  const LossContext ctx = build_loss_context(space);
  const QuadratureRule ewg = elementwise_gauss(4, space.partition);
  CHECK(loss_value(ctx, ewg) < 1e-13);
  const LossEvaluation eval = evaluate_loss(ctx, ewg);
  CHECK(eval.max_rel_residual < 1e-13);
}

TEST_CASE("unit-coefficient spline has unit norm") {
  // sum_i B_i = 1, so c = (1,...,1) has L2 norm exactly 1
  const LossContext ctx = build_loss_context(make_space(4, 2, uniform_partition(4)));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ctx.space.dimension());
  CHECK(spline_l2_norm(ctx, ones) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("loss bounds the quadrature error of every unit spline") {
  std::mt19937 rng(424242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const LossContext ctx = build_loss_context(make_space(3, 2, uniform_partition(4)));
  QuadratureRule rule = random_rule(5, rng);
  const double loss = loss_value(ctx, rule);
  const Eigen::VectorXd r = residuals(ctx, rule);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd c(ctx.space.dimension());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = gauss(rng);
    // quadrature error of f = sum c_i B_i is c . r by linearity
    const double err = std::abs(c.dot(r));
    CHECK(err <= loss * spline_l2_norm(ctx, c) * (1.0 + 1e-12));
  }
  const Eigen::VectorXd worst = worst_case_spline(ctx, rule);
  CHECK(spline_l2_norm(ctx, worst) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(worst.dot(r)) == doctest::Approx(loss).epsilon(1e-12));
}

TEST_CASE("worst_case_spline rejects an exact rule") {
  const SplineSpace space = make_space(2, 1, uniform_partition(2));
  const LossContext ctx = build_loss_context(space);
  CHECK_THROWS_AS(worst_case_spline(ctx, elementwise_gauss(3, space.partition)),
                  std::runtime_error);
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937 rng(1311);
  const struct {
    int d, k, ne, q;
  } cases[] = {{1, 0, 3, 3}, {3, 1, 3, 5}, {4, 2, 4, 6}, {5, 4, 6, 6}};
  for (const auto& c : cases) {
    const LossContext ctx = build_loss_context(make_space(c.d, c.k, uniform_partition(c.ne)));
    for (int trial = 0; trial < 4; ++trial) {
      QuadratureRule rule = random_rule(c.q, rng);
      const LossGradient grad = loss_squared_gradient(ctx, rule);
      REQUIRE(grad.d_points.size() == c.q);
      REQUIRE(grad.d_weights.size() == c.q);
      for (int m = 0; m < c.q; ++m) {
        const auto by_point = [&](double x) {
          QuadratureRule probe = rule;
          probe.points[m] = x;
          return loss_squared(ctx, probe);
        };
        const auto by_weight = [&](double w) {
          QuadratureRule probe = rule;
          probe.weights[m] = w;
          return loss_squared(ctx, probe);
        };
        const double fd_x = oracles::central_diff(by_point, rule.points[m]);
        const double fd_w = oracles::central_diff(by_weight, rule.weights[m]);
        CHECK(oracles::rel_gap(grad.d_points[m], fd_x) < 1e-6);
        CHECK(oracles::rel_gap(grad.d_weights[m], fd_w) < 1e-6);
      }
    }
  }
}

TEST_CASE("loss gradient switches to the squared form near zero") {
  const SplineSpace space = make_space(2, 1, uniform_partition(2));
  const LossContext ctx = build_loss_context(space);
  const QuadratureRule exact = elementwise_gauss(3, space.partition);
  const LossGradient near_zero = loss_gradient(ctx, exact);
  CHECK(near_zero.d_points.allFinite());
  CHECK(near_zero.d_weights.allFinite());

  std::mt19937 rng(5);
  const QuadratureRule rough = random_rule(4, rng);
  const LossGradient of_root = loss_gradient(ctx, rough);
  const LossGradient of_square = loss_squared_gradient(ctx, rough);
  const double loss = loss_value(ctx, rough);
  // away from zero: grad L = grad L^2 / (2 L)
  CHECK(of_root.d_points.isApprox(of_square.d_points / (2.0 * loss), 1e-12));
  CHECK(of_root.d_weights.isApprox(of_square.d_weights / (2.0 * loss), 1e-12));
}

TEST_CASE("evaluate_loss bundles value, residual, and gradient consistently") {
  std::mt19937 rng(99);
  const LossContext ctx = build_loss_context(make_space(3, 0, uniform_partition(3)));
  const QuadratureRule rule = random_rule(6, rng);
  const LossEvaluation eval = evaluate_loss(ctx, rule);
  CHECK(eval.squared == doctest::Approx(loss_squared(ctx, rule)).epsilon(1e-13));
  CHECK(eval.residual.isApprox(residuals(ctx, rule), 1e-13));
  const LossGradient grad = loss_squared_gradient(ctx, rule);
  CHECK(eval.gradient.d_points.isApprox(grad.d_points, 1e-12));
  CHECK(eval.gradient.d_weights.isApprox(grad.d_weights, 1e-12));
  const Eigen::VectorXd rel =
      eval.residual.cwiseAbs().cwiseQuotient(ctx.exact_integrals);
  CHECK(eval.max_rel_residual == doctest::Approx(rel.maxCoeff()).epsilon(1e-13));
}
