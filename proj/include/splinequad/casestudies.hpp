#pragma once

#include <Eigen/Dense>

#include <vector>

#include "splinequad/discovery.hpp"
#include "splinequad/quadrature.hpp"
#include "splinequad/splines.hpp"

namespace splinequad {

/// Stiffness and mass matrices of a 1D Laplace discretization.
struct SystemMatrices {
  Eigen::MatrixXd stiffness;  ///< K_ij = sum_m w_m B_i'(x_m) B_j'(x_m)
  Eigen::MatrixXd mass;       ///< M_ij = sum_m w_m B_i(x_m) B_j(x_m)
};

/// Assembles both matrices with the given rule over the whole domain.
SystemMatrices assemble(const SplineSpace& space, const QuadratureRule& rule);

/// Removes the first and last basis function (homogeneous Dirichlet on [0,1]).
SystemMatrices dirichlet_reduce(const SystemMatrices& matrices);

/// Ascending eigenvalues of K v = lambda M v for symmetric K and SPD M.
Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& stiffness,
                                        const Eigen::MatrixXd& mass);

/// Discrete spectrum against the exact Laplace eigenvalues (mode pi)^2.
struct SpectrumReport {
  Eigen::VectorXd eigenvalues;       ///< ascending discrete eigenvalues
  Eigen::VectorXd exact;             ///< (mode pi)^2, mode = 1..count
  Eigen::VectorXd errors;            ///< (lambda_h - lambda) / lambda
  Eigen::VectorXd normalized_modes;  ///< mode / normalization
};

/// normalization <= 0 means "use the eigenvalue count".
SpectrumReport ev_errors(const Eigen::VectorXd& eigenvalues, Eigen::Index normalization = 0);

/// Uniform mesh split into equal blocks of elements that meet with C^0
/// continuity; inside a block the space keeps the given continuity.
struct BlockedSpaces {
  std::vector<SplineSpace> blocks;  ///< unit-domain space of each block
  SplineSpace global;
  Eigen::Index block_count = 0;
  Eigen::Index block_size = 0;
};
BlockedSpaces blocked_spaces(Eigen::Index element_count, Eigen::Index block_size, int degree,
                             int continuity);

/// Copies a unit-domain rule into each of block_count equal segments of [0,1].
QuadratureRule concatenate_block_rules(const QuadratureRule& block_rule,
                                       Eigen::Index block_count);

/// Where the quadrature rule for a study comes from.
enum class RuleSource {
  Elementwise,    ///< degree+1 Gauss points per element
  Optimal,        ///< discovered rule for the mass/stiffness integrand space
  OptimalBlocks,  ///< discovered per-block rule on a C^0-blocked mesh
};

struct LaplaceOptions {
  int degree = 2;  ///< solution space degree; continuity is degree-1 inside blocks
  Partition partition;
  RuleSource source = RuleSource::Elementwise;
  Eigen::Index block_size = 0;      ///< for OptimalBlocks
  Eigen::Index normalization = 0;   ///< mode normalization override (0: own dof count)
  SearchConfig search;
};

struct LaplaceStudy {
  QuadratureRule rule;
  bool rule_converged = true;  ///< false when a discovered rule missed the tolerance
  Eigen::Index dof_count = 0;  ///< system size after the Dirichlet reduction
  SpectrumReport spectrum;
};

/// Discretizes -u'' = lambda u on [0,1] with zero boundary values and reports
/// the full discrete spectrum.
LaplaceStudy laplace_study(const LaplaceOptions& options);

/// Planar degree-2 test curve with a uniform five-element parameterization;
/// runs from (0, 0) to (0.9, 0).
BSplineCurve tschirnhausen_curve();

/// Strongly graded 20-element partition exercising the non-uniform search.
Partition benchmark_nonuniform_partition();

}  // namespace splinequad
