#include "splinequad/splines.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace splinequad {

namespace {

void check_parameter(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("evaluation point must lie in [0, 1]");
  }
}

Eigen::VectorXd build_clamped_knots(int degree, const Partition& partition,
                                    const std::vector<int>& interior_multiplicities) {
  const Eigen::Index ne = partition.element_count();
  Eigen::Index total = 2 * (degree + 1);
  for (int m : interior_multiplicities) {
    if (m < 1 || m > degree) {
      throw std::invalid_argument("interior knot multiplicity must lie in [1, degree]");
    }
    total += m;
  }
  Eigen::VectorXd xi(total);
  Eigen::Index pos = 0;
  for (int r = 0; r <= degree; ++r) xi[pos++] = 0.0;
  for (Eigen::Index j = 1; j < ne; ++j) {
    for (int r = 0; r < interior_multiplicities[static_cast<std::size_t>(j - 1)]; ++r) {
      xi[pos++] = partition.knots[j];
    }
  }
  for (int r = 0; r <= degree; ++r) xi[pos++] = 1.0;
  return xi;
}

}  // namespace

Partition make_partition(Eigen::VectorXd knots) {
  if (knots.size() < 2) {
    throw std::invalid_argument("a partition needs at least two breakpoints");
  }
  if (knots[0] != 0.0 || knots[knots.size() - 1] != 1.0) {
    throw std::invalid_argument("partition must span exactly [0, 1]");
  }
  for (Eigen::Index j = 0; j + 1 < knots.size(); ++j) {
    if (!(knots[j] < knots[j + 1])) {
      throw std::invalid_argument("partition breakpoints must be strictly increasing");
    }
  }
  return Partition{std::move(knots)};
}

Partition uniform_partition(Eigen::Index element_count) {
  if (element_count < 1) {
    throw std::invalid_argument("element count must be positive");
  }
  return Partition{Eigen::VectorXd::LinSpaced(element_count + 1, 0.0, 1.0)};
}

SplineSpace make_space(int degree, int continuity, Partition partition) {
  if (degree < 0 || degree > kMaxDegree) {
    throw std::invalid_argument("degree out of supported range");
  }
  const Eigen::Index ne = partition.element_count();
  if (ne > 1) {
    if (continuity < 0 || continuity >= degree) {
      throw std::invalid_argument("continuity must satisfy 0 <= continuity < degree");
    }
  } else if (continuity < 0 || (continuity >= degree && continuity != 0)) {
    // Single-element spaces have no interior knots; only reject nonsense input.
    throw std::invalid_argument("continuity must satisfy 0 <= continuity < degree");
  }
  const int multiplicity = degree - continuity;
  const std::vector<int> mults(static_cast<std::size_t>(ne > 0 ? ne - 1 : 0),
                               ne > 1 ? multiplicity : 1);
  SplineSpace space;
  space.degree = degree;
  space.continuity = continuity;
  space.clamped_knots = build_clamped_knots(degree, partition, mults);
  space.partition = std::move(partition);
  return space;
}

SplineSpace make_space_with_multiplicities(int degree, Partition partition,
                                           const std::vector<int>& interior_multiplicities) {
  if (degree < 1 || degree > kMaxDegree) {
    throw std::invalid_argument("degree out of supported range");
  }
  const Eigen::Index ne = partition.element_count();
  if (static_cast<Eigen::Index>(interior_multiplicities.size()) != ne - 1) {
    throw std::invalid_argument("need one multiplicity per interior breakpoint");
  }
  int max_mult = 1;
  for (int m : interior_multiplicities) max_mult = std::max(max_mult, m);
  SplineSpace space;
  space.degree = degree;
  space.continuity = degree - max_mult;
  space.clamped_knots = build_clamped_knots(degree, partition, interior_multiplicities);
  space.partition = std::move(partition);
  return space;
}

namespace detail {

int find_span(int degree, const Eigen::VectorXd& knots, double x) {
  const Eigen::Index last = knots.size() - degree - 2;  // index of the last basis function
  if (x >= knots[last + 1]) return static_cast<int>(last);
  Eigen::Index lo = degree;
  Eigen::Index hi = last;
  while (lo < hi) {
    const Eigen::Index mid = (lo + hi + 1) / 2;
    if (knots[mid] <= x) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return static_cast<int>(lo);
}

void basis_values(int degree, const Eigen::VectorXd& knots, int span, double x, double* out) {
  double left[kMaxDegree + 1];
  double right[kMaxDegree + 1];
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

void basis_derivatives(int degree, const Eigen::VectorXd& knots, int span, double x,
                       int max_order, Eigen::Ref<Eigen::MatrixXd> out) {
  // Triangular table of values plus the knot differences that produced them;
  // derivative rows are assembled from quotients of table entries.
  double ndu[kMaxDegree + 1][kMaxDegree + 1];
  double left[kMaxDegree + 1];
  double right[kMaxDegree + 1];
  double a[2][kMaxDegree + 1];

  ndu[0][0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= degree; ++j) out(0, j) = ndu[j][degree];

  for (int r = 0; r <= degree; ++r) {
    int s1 = 0;
    int s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= max_order; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = degree - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? (k - 1) : (degree - r);
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      out(k, r) = d;
      std::swap(s1, s2);
    }
  }

  double factor = degree;
  for (int k = 1; k <= max_order; ++k) {
    for (int j = 0; j <= degree; ++j) out(k, j) *= factor;
    factor *= degree - k;
  }
}

}  // namespace detail

int find_span(const SplineSpace& space, double x) {
  check_parameter(x);
  return detail::find_span(space.degree, space.clamped_knots, x);
}

LocalBasis eval_basis_local(const SplineSpace& space, double x) {
  check_parameter(x);
  const int span = detail::find_span(space.degree, space.clamped_knots, x);
  LocalBasis local;
  local.first_index = span - space.degree;
  local.values.resize(space.degree + 1);
  detail::basis_values(space.degree, space.clamped_knots, span, x, local.values.data());
  return local;
}

LocalBasisDerivatives eval_basis_derivatives_local(const SplineSpace& space, double x,
                                                   int max_order) {
  check_parameter(x);
  if (max_order < 0 || max_order > space.degree) {
    throw std::invalid_argument("derivative order must lie in [0, degree]");
  }
  const int span = detail::find_span(space.degree, space.clamped_knots, x);
  LocalBasisDerivatives local;
  local.first_index = span - space.degree;
  local.derivatives.resize(max_order + 1, space.degree + 1);
  detail::basis_derivatives(space.degree, space.clamped_knots, span, x, max_order,
                            local.derivatives);
  return local;
}

Eigen::VectorXd eval_basis(const SplineSpace& space, double x) {
  const LocalBasis local = eval_basis_local(space, x);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(space.dimension());
  values.segment(local.first_index, space.degree + 1) = local.values;
  return values;
}

Eigen::MatrixXd eval_basis_derivatives(const SplineSpace& space, double x, int max_order) {
  const LocalBasisDerivatives local = eval_basis_derivatives_local(space, x, max_order);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(max_order + 1, space.dimension());
  values.block(0, local.first_index, max_order + 1, space.degree + 1) = local.derivatives;
  return values;
}

double basis_integral(const SplineSpace& space, Eigen::Index i) {
  if (i < 0 || i >= space.dimension()) {
    throw std::invalid_argument("basis index out of range");
  }
  return (space.clamped_knots[i + space.degree + 1] - space.clamped_knots[i]) /
         (space.degree + 1);
}

Eigen::VectorXd basis_integrals(const SplineSpace& space) {
  const Eigen::Index n = space.dimension();
  Eigen::VectorXd integrals(n);
  for (Eigen::Index i = 0; i < n; ++i) integrals[i] = basis_integral(space, i);
  return integrals;
}

CurvePoint eval_curve(const BSplineCurve& curve, double x) {
  check_parameter(x);
  if (curve.degree < 1 || curve.degree > kMaxDegree) {
    throw std::invalid_argument("curve degree out of supported range");
  }
  if (curve.control_points.rows() != curve.dimension()) {
    throw std::invalid_argument("control point count must match the basis dimension");
  }
  const int span = detail::find_span(curve.degree, curve.clamped_knots, x);
  const int max_order = std::min(2, curve.degree);
  Eigen::MatrixXd ders(max_order + 1, curve.degree + 1);
  detail::basis_derivatives(curve.degree, curve.clamped_knots, span, x, max_order, ders);

  CurvePoint result;
  Eigen::Vector2d rows[3] = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
                             Eigen::Vector2d::Zero()};
  const int first = span - curve.degree;
  for (int r = 0; r <= max_order; ++r) {
    for (int j = 0; j <= curve.degree; ++j) {
      rows[r] += ders(r, j) * curve.control_points.row(first + j).transpose();
    }
  }
  result.position = rows[0];
  result.first_derivative = rows[1];
  result.second_derivative = rows[2];
  result.jacobian = rows[1].norm();
  if (!(result.jacobian > 0.0) || !std::isfinite(result.jacobian)) {
    throw std::runtime_error("curve parameterization is singular at the requested point");
  }
  const double cross = rows[1].x() * rows[2].y() - rows[1].y() * rows[2].x();
  result.curvature = std::abs(cross) / (result.jacobian * result.jacobian * result.jacobian);
  return result;
}

}  // namespace splinequad
