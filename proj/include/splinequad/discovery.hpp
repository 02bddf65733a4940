#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "splinequad/loss.hpp"
#include "splinequad/quadrature.hpp"
#include "splinequad/splines.hpp"

namespace splinequad {

/// A search that had to converge (to seed a later stage) did not.
struct SearchFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// How free parameters map onto a full rule.
enum class ParamMode {
  /// Rule is mirror-symmetric about 1/2: floor(q/2) free points in (0, 1/2),
  /// ceil(q/2)-1 free weights; the center/derived weight keeps the sum at 1.
  Symmetric,
  /// Every point free, q-1 free weights; the last weight keeps the sum at 1.
  Full,
};

int free_point_count(ParamMode mode, int point_count);
int free_weight_count(ParamMode mode, int point_count);

/// Free parameters of a candidate rule.
struct FreeParams {
  ParamMode mode = ParamMode::Symmetric;
  int point_count = 0;
  Eigen::VectorXd points;   ///< size free_point_count(mode, point_count)
  Eigen::VectorXd weights;  ///< size free_weight_count(mode, point_count)
};

/// Builds the full rule the parameters describe.
QuadratureRule expand(const FreeParams& params);

/// Chain rule of expand: pulls a full-rule gradient back onto the free
/// parameters (points first, then weights).
Eigen::VectorXd pullback_gradient(const FreeParams& params, const LossGradient& gradient);

/// Starting guess for the two-element spaces that root each refinement chain:
/// equispaced points in (0, 1/2), all weights 1/q.
FreeParams symmetric_equispaced_init(int point_count);

/// Starting guess for a refined partition: the converged rule for ne-1
/// elements scaled by (ne-1)/ne, truncated to the new free-parameter counts.
FreeParams refine_init(const QuadratureRule& previous, int point_count,
                       Eigen::Index element_count);

/// Starting guess for zero-continuity spaces (and single elements): midpoints
/// of q equal subintervals, all weights 1/q.
FreeParams midpoint_init(int point_count);

/// Starting guess obtained by carrying a rule from one partition to another
/// with the same element count: each point is mapped affinely into the
/// matching target element, weights scaled by the element length ratio.
/// Full (asymmetric) parameterization.
FreeParams transfer_init(const QuadratureRule& rule, const Partition& source,
                         const Partition& target);

/// transfer_init from the uniform partition with target.element_count() elements.
FreeParams stretch_init(const QuadratureRule& uniform_rule, const Partition& target);

/// Step size 0.01 / (q ln q) the optimizer uses for a q-point rule.
double learning_rate(int point_count, double constant = 1e-2);

struct YogiConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-3;
};

/// Per-parameter moment estimates; additive second-moment updates keep the
/// effective step from collapsing when gradients spike.
struct OptimizerState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;
};

OptimizerState make_optimizer_state(Eigen::Index parameter_count);

/// One bias-corrected update of `parameters` in place.
void yogi_step(OptimizerState& state, Eigen::VectorXd& parameters,
               const Eigen::VectorXd& gradient, double learning_rate,
               const YogiConfig& config = {});

struct SearchConfig {
  double lr_constant = 1e-2;          ///< numerator of the learning-rate formula
  long max_epochs = 10000;
  double stop_loss = 1e-25;           ///< stop when L drops below this
  double stop_exactness = 1e-13;      ///< ... or the max relative residual does
  double exactness_tolerance = 1e-12; ///< "converged" means max rel residual <= this
  int continuation_stages = 8;        ///< intermediate meshes between uniform and a target partition
  YogiConfig yogi;
};

struct SearchResult {
  QuadratureRule rule;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double max_rel_error = 0.0;  ///< max_i |r_i| / I(B_i) at the final rule
  long epochs = 0;
  bool converged = false;
};

/// Gradient descent on the squared dual-norm loss from the given start.
SearchResult search(const LossContext& context, FreeParams start,
                    const SearchConfig& config = {});
SearchResult search(const SplineSpace& integrand, FreeParams start,
                    const SearchConfig& config = {});

/// One entry of a refinement chain.
struct ChainLink {
  Eigen::Index element_count = 0;
  SearchResult result;
  bool skipped = false;  ///< an earlier link failed, so this one never ran
};

/// Discovers rules for uniform partitions with ne = 2..max_elements.
/// Positive-continuity chains reuse each converged rule to start the next
/// search and skip the remainder once a link fails; zero-continuity cases are
/// independent and never skip.
std::vector<ChainLink> discover_uniform_chain(int degree, int continuity,
                                              Eigen::Index max_elements,
                                              const SearchConfig& config = {});

/// Rule for the (degree, continuity) space on ne uniform elements.
/// Throws if an earlier chain link failed to converge.
SearchResult discover_uniform(int degree, int continuity, Eigen::Index element_count,
                              const SearchConfig& config = {});

/// Rule on a non-uniform partition. The uniform-mesh rule for the same space
/// seeds a continuation that walks through config.continuation_stages blended
/// partitions, re-converging after each hop; a fixed step size stalls short of
/// the exactness target when asked to cross the whole gap at once. Throws if
/// the uniform chain stalls or any stage fails to converge.
SearchResult discover_nonuniform(int degree, int continuity, const Partition& target,
                                 const SearchConfig& config = {});

/// Same continuation from an already-computed uniform-mesh rule.
SearchResult discover_nonuniform(int degree, int continuity, const Partition& target,
                                 const QuadratureRule& uniform_rule,
                                 const SearchConfig& config = {});

}  // namespace splinequad
