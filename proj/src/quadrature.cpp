#include "splinequad/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "accumulate.hpp"

namespace splinequad {

namespace {

// Value of the Legendre polynomial P_n and its derivative at t in [-1, 1],
// via the three-term recurrence.
void legendre_with_derivative(int n, double t, double& value, double& derivative) {
  double prev = 1.0;   // P_0
  double curr = t;     // P_1
  for (int k = 2; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0) * t * curr - (k - 1.0) * prev) / k;
    prev = curr;
    curr = next;
  }
  value = (n == 0) ? 1.0 : curr;
  if (n == 0) {
    derivative = 0.0;
  } else {
    derivative = n * (t * curr - prev) / (t * t - 1.0);
  }
}

}  // namespace

void validate_rule(const QuadratureRule& rule, double weight_sum_tol) {
  const Eigen::Index q = rule.points.size();
  if (q < 1 || rule.weights.size() != q) {
    throw std::invalid_argument("rule needs matching, non-empty points and weights");
  }
  for (Eigen::Index m = 0; m < q; ++m) {
    if (!(rule.points[m] > 0.0 && rule.points[m] < 1.0)) {
      throw std::invalid_argument("rule points must lie strictly inside (0, 1)");
    }
    if (m > 0 && !(rule.points[m - 1] < rule.points[m])) {
      throw std::invalid_argument("rule points must be strictly ascending");
    }
    if (!std::isfinite(rule.weights[m])) {
      throw std::invalid_argument("rule weights must be finite");
    }
  }
  detail::KahanAccumulator total;
  for (Eigen::Index m = 0; m < q; ++m) total.add(rule.weights[m]);
  if (std::abs(total.value() - 1.0) > weight_sum_tol) {
    throw std::invalid_argument("rule weights must sum to 1");
  }
}

int optimal_point_count(int degree, int continuity, Eigen::Index element_count) {
  if (degree < 0 || element_count < 1) {
    throw std::invalid_argument("degree must be >= 0 and element count positive");
  }
  if (element_count > 1 && (continuity < 0 || continuity >= degree)) {
    throw std::invalid_argument("continuity must satisfy 0 <= continuity < degree");
  }
  const long long extra =
      (static_cast<long long>(element_count) - 1) * (degree - continuity);
  const long long q = (degree + extra + 2) / 2;  // ceil((degree + extra + 1) / 2)
  return static_cast<int>(q);
}

QuadratureRule gauss_legendre(int point_count) {
  if (point_count < 1) {
    throw std::invalid_argument("point count must be positive");
  }
  const int n = point_count;
  Eigen::VectorXd nodes(n);   // on [-1, 1], descending while filling
  Eigen::VectorXd weights(n);

  // Newton iteration from the Chebyshev-like initial guess; roots come in
  // +/- pairs, so solve the upper half and mirror.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double value = 0.0;
    double derivative = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre_with_derivative(n, t, value, derivative);
      const double step = value / derivative;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    if (n % 2 == 1 && i == half - 1) t = 0.0;  // central root is exact
    legendre_with_derivative(n, t, value, derivative);
    const double w = 2.0 / ((1.0 - t * t) * derivative * derivative);
    nodes[i] = t;
    weights[i] = w;
    nodes[n - 1 - i] = -t;
    weights[n - 1 - i] = w;
  }

  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Reverse into ascending order and map [-1, 1] -> [0, 1].
    rule.points[i] = 0.5 * (1.0 - nodes[i]);
    rule.weights[i] = 0.5 * weights[i];
  }
  return rule;
}

QuadratureRule elementwise_gauss(int points_per_element, const Partition& partition) {
  const QuadratureRule unit = gauss_legendre(points_per_element);
  const Eigen::Index ne = partition.element_count();
  QuadratureRule rule;
  rule.points.resize(points_per_element * ne);
  rule.weights.resize(points_per_element * ne);
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < ne; ++j) {
    const double a = partition.knots[j];
    const double h = partition.element_length(j);
    for (int m = 0; m < points_per_element; ++m) {
      rule.points[pos] = a + h * unit.points[m];
      rule.weights[pos] = h * unit.weights[m];
      ++pos;
    }
  }
  return rule;
}

ExactnessReport verify_exactness(const QuadratureRule& rule, const SplineSpace& space) {
  const Eigen::Index n = space.dimension();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(n);
  for (Eigen::Index m = 0; m < rule.count(); ++m) {
    const LocalBasis local = eval_basis_local(space, rule.points[m]);
    const double w = rule.weights[m];
    for (int j = 0; j <= space.degree; ++j) {
      const Eigen::Index i = local.first_index + j;
      const double term = w * local.values[j] - comp[i];
      const double t = acc[i] + term;
      comp[i] = (t - acc[i]) - term;
      acc[i] = t;
    }
  }

  ExactnessReport report;
  report.errors.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double exact = basis_integral(space, i);
    const double error = exact - acc[i];
    report.errors[i] = error;
    report.max_abs_error = std::max(report.max_abs_error, std::abs(error));
    const double rel = std::abs(error) / exact;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
  }
  return report;
}

SavingsRow savings_row(int degree, Eigen::Index element_count, int space_dim) {
  if (degree < 2) {
    throw std::invalid_argument("savings comparison needs degree >= 2");
  }
  if (space_dim < 1 || space_dim > 3) {
    throw std::invalid_argument("spatial dimension must be 1, 2, or 3");
  }
  SavingsRow row;
  row.degree = degree;
  row.element_count = element_count;
  row.space_dim = space_dim;
  // Mass/stiffness integrands of a C^{p-1} degree-p space live in the
  // degree-2p, continuity-(p-2) space on the same partition.
  const long long optimal_1d = optimal_point_count(2 * degree, degree - 2, element_count);
  const long long elementwise_1d = static_cast<long long>(degree + 1) * element_count;
  long long optimal = 1;
  long long elementwise = 1;
  for (int d = 0; d < space_dim; ++d) {
    optimal *= optimal_1d;
    elementwise *= elementwise_1d;
  }
  row.optimal_points = optimal;
  row.elementwise_points = elementwise;
  row.savings = 1.0 - static_cast<double>(optimal) / static_cast<double>(elementwise);
  return row;
}

}  // namespace splinequad
