#include "splinequad/casestudies.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace splinequad {

namespace {

bool is_uniform(const Partition& partition, double tol = 1e-12) {
  const Eigen::Index ne = partition.element_count();
  for (Eigen::Index j = 0; j <= ne; ++j) {
    const double expected = static_cast<double>(j) / static_cast<double>(ne);
    if (std::abs(partition.knots[j] - expected) > tol) return false;
  }
  return true;
}

}  // namespace

SystemMatrices assemble(const SplineSpace& space, const QuadratureRule& rule) {
  const Eigen::Index n = space.dimension();
  const int p = space.degree;
  if (p < 1) {
    throw std::invalid_argument("assembly needs a degree >= 1 solution space");
  }
  SystemMatrices matrices;
  matrices.stiffness = Eigen::MatrixXd::Zero(n, n);
  matrices.mass = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index m = 0; m < rule.count(); ++m) {
    const LocalBasisDerivatives local = eval_basis_derivatives_local(space, rule.points[m], 1);
    const double w = rule.weights[m];
    for (int a = 0; a <= p; ++a) {
      const Eigen::Index ia = local.first_index + a;
      const double va = local.derivatives(0, a);
      const double da = local.derivatives(1, a);
      for (int b = 0; b <= p; ++b) {
        const Eigen::Index ib = local.first_index + b;
        matrices.mass(ia, ib) += w * va * local.derivatives(0, b);
        matrices.stiffness(ia, ib) += w * da * local.derivatives(1, b);
      }
    }
  }
  return matrices;
}

SystemMatrices dirichlet_reduce(const SystemMatrices& matrices) {
  const Eigen::Index n = matrices.stiffness.rows();
  if (n < 3) {
    throw std::invalid_argument("need at least three basis functions to reduce");
  }
  SystemMatrices reduced;
  reduced.stiffness = matrices.stiffness.block(1, 1, n - 2, n - 2);
  reduced.mass = matrices.mass.block(1, 1, n - 2, n - 2);
  return reduced;
}

Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& stiffness,
                                        const Eigen::MatrixXd& mass) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.compute(stiffness, mass, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("generalized eigenvalue solve failed");
  }
  return solver.eigenvalues();
}

SpectrumReport ev_errors(const Eigen::VectorXd& eigenvalues, Eigen::Index normalization) {
  const Eigen::Index count = eigenvalues.size();
  const double scale =
      normalization > 0 ? static_cast<double>(normalization) : static_cast<double>(count);
  SpectrumReport report;
  report.eigenvalues = eigenvalues;
  report.exact.resize(count);
  report.errors.resize(count);
  report.normalized_modes.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double mode = static_cast<double>(i + 1);
    const double exact = mode * mode * std::numbers::pi * std::numbers::pi;
    report.exact[i] = exact;
    report.errors[i] = (eigenvalues[i] - exact) / exact;
    report.normalized_modes[i] = mode / scale;
  }
  return report;
}

BlockedSpaces blocked_spaces(Eigen::Index element_count, Eigen::Index block_size, int degree,
                             int continuity) {
  if (block_size < 1 || element_count < block_size || element_count % block_size != 0) {
    throw std::invalid_argument("block size must evenly divide the element count");
  }
  if (degree < 1) {
    throw std::invalid_argument("blocked spaces need degree >= 1");
  }
  BlockedSpaces result;
  result.block_size = block_size;
  result.block_count = element_count / block_size;

  const SplineSpace unit_block =
      block_size == 1 ? make_space(degree, 0, uniform_partition(1))
                      : make_space(degree, continuity, uniform_partition(block_size));
  result.blocks.assign(static_cast<std::size_t>(result.block_count), unit_block);

  std::vector<int> multiplicities(static_cast<std::size_t>(element_count - 1),
                                  degree - continuity);
  for (Eigen::Index j = block_size; j < element_count; j += block_size) {
    multiplicities[static_cast<std::size_t>(j - 1)] = degree;  // C^0 separator
  }
  result.global = make_space_with_multiplicities(degree, uniform_partition(element_count),
                                                 multiplicities);
  return result;
}

QuadratureRule concatenate_block_rules(const QuadratureRule& block_rule,
                                       Eigen::Index block_count) {
  if (block_count < 1) {
    throw std::invalid_argument("block count must be positive");
  }
  const Eigen::Index q = block_rule.count();
  QuadratureRule rule;
  rule.points.resize(q * block_count);
  rule.weights.resize(q * block_count);
  const double h = 1.0 / static_cast<double>(block_count);
  Eigen::Index pos = 0;
  for (Eigen::Index b = 0; b < block_count; ++b) {
    const double a = static_cast<double>(b) * h;
    for (Eigen::Index m = 0; m < q; ++m) {
      rule.points[pos] = a + h * block_rule.points[m];
      rule.weights[pos] = h * block_rule.weights[m];
      ++pos;
    }
  }
  return rule;
}

LaplaceStudy laplace_study(const LaplaceOptions& options) {
  const int p = options.degree;
  if (p < 1) {
    throw std::invalid_argument("solution space degree must be >= 1");
  }
  const Eigen::Index ne = options.partition.element_count();
  if (options.source != RuleSource::Elementwise && p < 2) {
    // Degree-1 stiffness integrands are discontinuous at the breakpoints;
    // only the element-wise rule handles those.
    throw std::invalid_argument("discovered rules need solution degree >= 2");
  }
  const int integrand_degree = 2 * p;
  const int integrand_continuity = p - 2;

  LaplaceStudy study;
  SplineSpace solution_space;

  switch (options.source) {
    case RuleSource::Elementwise: {
      solution_space = make_space(p, ne > 1 ? p - 1 : 0, options.partition);
      study.rule = elementwise_gauss(p + 1, options.partition);
      break;
    }
    case RuleSource::Optimal: {
      solution_space = make_space(p, ne > 1 ? p - 1 : 0, options.partition);
      SearchResult found;
      if (is_uniform(options.partition)) {
        found = discover_uniform(integrand_degree, integrand_continuity, ne, options.search);
      } else {
        found = discover_nonuniform(integrand_degree, integrand_continuity,
                                    options.partition, options.search);
      }
      study.rule = std::move(found.rule);
      study.rule_converged = found.converged;
      break;
    }
    case RuleSource::OptimalBlocks: {
      if (!is_uniform(options.partition)) {
        throw std::invalid_argument("blocked rules need a uniform partition");
      }
      const BlockedSpaces blocked =
          blocked_spaces(ne, options.block_size, p, p >= 1 ? p - 1 : 0);
      solution_space = blocked.global;
      const SearchResult found = discover_uniform(integrand_degree, integrand_continuity,
                                                  options.block_size, options.search);
      study.rule = concatenate_block_rules(found.rule, blocked.block_count);
      study.rule_converged = found.converged;
      break;
    }
  }

  const SystemMatrices reduced = dirichlet_reduce(assemble(solution_space, study.rule));
  study.dof_count = reduced.stiffness.rows();
  const Eigen::VectorXd eigenvalues =
      generalized_eigenvalues(reduced.stiffness, reduced.mass);
  study.spectrum = ev_errors(eigenvalues, options.normalization);
  return study;
}

BSplineCurve tschirnhausen_curve() {
  BSplineCurve curve;
  curve.degree = 2;
  curve.clamped_knots.resize(10);
  curve.clamped_knots << 0.0, 0.0, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0;
  curve.control_points.resize(7, 2);
  curve.control_points << 0.0, 0.0,        //
      0.0122, 0.1137,                      //
      0.2121, 0.2065,                      //
      0.4196, 0.1945,                      //
      0.6208, 0.1385,                      //
      0.8099, 0.0519,                      //
      0.9, 0.0;
  return curve;
}

Partition benchmark_nonuniform_partition() {
  Eigen::VectorXd knots(21);
  knots << 0.000, 0.009, 0.035, 0.056, 0.104, 0.231, 0.282, 0.345, 0.379, 0.512, 0.558,
      0.577, 0.613, 0.649, 0.719, 0.771, 0.914, 0.927, 0.948, 0.981, 1.000;
  return make_partition(std::move(knots));
}

}  // namespace splinequad
