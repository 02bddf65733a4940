#include "splinequad/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace splinequad {

namespace {

// Keeps optimized points strictly inside the domain.
constexpr double kPointMargin = 1e-9;

void check_point_count(int point_count) {
  if (point_count < 1) {
    throw std::invalid_argument("point count must be positive");
  }
}

bool parameters_ordered(const FreeParams& params) {
  const Eigen::VectorXd& f = params.points;
  for (Eigen::Index i = 0; i + 1 < f.size(); ++i) {
    if (!(f[i] < f[i + 1])) return false;
  }
  if (params.mode == ParamMode::Symmetric && f.size() > 0 && !(f[f.size() - 1] < 0.5)) {
    return false;
  }
  return true;
}

// A step scrambled the point ordering: sort the expanded rule, re-read the
// free parameters off the sorted rule, and move the optimizer moments with
// the parameters they describe (mirrored points flip the sign of their
// first moment; derived slots start fresh).
void restore_ordering(FreeParams& params, OptimizerState& state) {
  const int q = params.point_count;
  const int fx = free_point_count(params.mode, q);
  const int fw = free_weight_count(params.mode, q);
  const QuadratureRule rule = expand(params);

  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&rule](int a, int b) { return rule.points[a] < rule.points[b]; });

  Eigen::VectorXd new_points(fx);
  Eigen::VectorXd new_weights(fw);
  Eigen::VectorXd new_m = Eigen::VectorXd::Zero(fx + fw);
  Eigen::VectorXd new_v = Eigen::VectorXd::Zero(fx + fw);

  for (int j = 0; j < fx; ++j) {
    const int o = order[static_cast<std::size_t>(j)];
    new_points[j] = rule.points[o];
    if (params.mode == ParamMode::Full) {
      new_m[j] = state.first_moment[o];
      new_v[j] = state.second_moment[o];
    } else if (o != q - 1 - o) {
      const int source = std::min(o, q - 1 - o);
      const double sign = o < fx ? 1.0 : -1.0;
      new_m[j] = sign * state.first_moment[source];
      new_v[j] = state.second_moment[source];
    }
  }
  for (int j = 0; j < fw; ++j) {
    const int o = order[static_cast<std::size_t>(j)];
    new_weights[j] = rule.weights[o];
    int source = -1;
    if (params.mode == ParamMode::Full) {
      if (o < q - 1) source = o;
    } else {
      const int paired = std::min(o, q - 1 - o);
      if (paired < fw) source = paired;
    }
    if (source >= 0) {
      new_m[fx + j] = state.first_moment[fx + source];
      new_v[fx + j] = state.second_moment[fx + source];
    }
  }

  params.points = std::move(new_points);
  params.weights = std::move(new_weights);
  state.first_moment = std::move(new_m);
  state.second_moment = std::move(new_v);
}

}  // namespace

int free_point_count(ParamMode mode, int point_count) {
  check_point_count(point_count);
  return mode == ParamMode::Symmetric ? point_count / 2 : point_count;
}

int free_weight_count(ParamMode mode, int point_count) {
  check_point_count(point_count);
  return mode == ParamMode::Symmetric ? (point_count + 1) / 2 - 1 : point_count - 1;
}

QuadratureRule expand(const FreeParams& params) {
  const int q = params.point_count;
  if (params.points.size() != free_point_count(params.mode, q) ||
      params.weights.size() != free_weight_count(params.mode, q)) {
    throw std::invalid_argument("free parameter sizes do not match the parameterization");
  }
  QuadratureRule rule;
  rule.points.resize(q);
  rule.weights.resize(q);
  if (params.mode == ParamMode::Symmetric) {
    const int m = q / 2;
    for (int i = 0; i < m; ++i) {
      rule.points[i] = params.points[i];
      rule.points[q - 1 - i] = 1.0 - params.points[i];
    }
    if (q % 2 == 1) {
      rule.points[m] = 0.5;
      double total = 0.0;
      for (int i = 0; i < m; ++i) {
        rule.weights[i] = params.weights[i];
        rule.weights[q - 1 - i] = params.weights[i];
        total += params.weights[i];
      }
      rule.weights[m] = 1.0 - 2.0 * total;
    } else {
      double total = 0.0;
      for (int i = 0; i + 1 < m; ++i) {
        rule.weights[i] = params.weights[i];
        rule.weights[q - 1 - i] = params.weights[i];
        total += params.weights[i];
      }
      const double derived = 0.5 - total;
      rule.weights[m - 1] = derived;
      rule.weights[m] = derived;
    }
  } else {
    rule.points = params.points;
    double total = 0.0;
    for (int i = 0; i + 1 < q; ++i) {
      rule.weights[i] = params.weights[i];
      total += params.weights[i];
    }
    rule.weights[q - 1] = 1.0 - total;
  }
  return rule;
}

Eigen::VectorXd pullback_gradient(const FreeParams& params, const LossGradient& gradient) {
  const int q = params.point_count;
  if (gradient.d_points.size() != q || gradient.d_weights.size() != q) {
    throw std::invalid_argument("gradient size does not match the rule");
  }
  const int fx = free_point_count(params.mode, q);
  const int fw = free_weight_count(params.mode, q);
  Eigen::VectorXd out(fx + fw);
  if (params.mode == ParamMode::Symmetric) {
    const int m = q / 2;
    for (int i = 0; i < m; ++i) {
      out[i] = gradient.d_points[i] - gradient.d_points[q - 1 - i];
    }
    if (q % 2 == 1) {
      for (int i = 0; i < fw; ++i) {
        out[fx + i] = gradient.d_weights[i] + gradient.d_weights[q - 1 - i] -
                      2.0 * gradient.d_weights[m];
      }
    } else {
      for (int i = 0; i < fw; ++i) {
        out[fx + i] = gradient.d_weights[i] + gradient.d_weights[q - 1 - i] -
                      gradient.d_weights[m - 1] - gradient.d_weights[m];
      }
    }
  } else {
    out.head(q) = gradient.d_points;
    for (int i = 0; i + 1 < q; ++i) {
      out[q + i] = gradient.d_weights[i] - gradient.d_weights[q - 1];
    }
  }
  return out;
}

FreeParams symmetric_equispaced_init(int point_count) {
  check_point_count(point_count);
  FreeParams params;
  params.mode = ParamMode::Symmetric;
  params.point_count = point_count;
  const int fx = free_point_count(params.mode, point_count);
  const int fw = free_weight_count(params.mode, point_count);
  params.points.resize(fx);
  for (int i = 0; i < fx; ++i) {
    params.points[i] = 0.5 * (i + 1) / (fx + 1);
  }
  params.weights = Eigen::VectorXd::Constant(fw, 1.0 / point_count);
  return params;
}

FreeParams midpoint_init(int point_count) {
  check_point_count(point_count);
  FreeParams params;
  params.mode = ParamMode::Symmetric;
  params.point_count = point_count;
  const int fx = free_point_count(params.mode, point_count);
  const int fw = free_weight_count(params.mode, point_count);
  params.points.resize(fx);
  for (int i = 0; i < fx; ++i) {
    params.points[i] = (2.0 * i + 1.0) / (2.0 * point_count);
  }
  params.weights = Eigen::VectorXd::Constant(fw, 1.0 / point_count);
  return params;
}

FreeParams refine_init(const QuadratureRule& previous, int point_count,
                       Eigen::Index element_count) {
  check_point_count(point_count);
  if (element_count < 2) {
    throw std::invalid_argument("refinement needs at least two elements");
  }
  FreeParams params;
  params.mode = ParamMode::Symmetric;
  params.point_count = point_count;
  const int fx = free_point_count(params.mode, point_count);
  const int fw = free_weight_count(params.mode, point_count);
  if (previous.count() < fx || previous.count() < fw) {
    throw std::invalid_argument("previous rule is too small to seed the refinement");
  }
  const double scale =
      static_cast<double>(element_count - 1) / static_cast<double>(element_count);
  params.points = previous.points.head(fx) * scale;
  params.weights = previous.weights.head(fw) * scale;
  return params;
}

FreeParams transfer_init(const QuadratureRule& rule, const Partition& source,
                         const Partition& target) {
  const Eigen::Index q = rule.count();
  check_point_count(static_cast<int>(q));
  const Eigen::Index ne = source.element_count();
  if (target.element_count() != ne) {
    throw std::invalid_argument("source and target partitions must have the same element count");
  }
  FreeParams params;
  params.mode = ParamMode::Full;
  params.point_count = static_cast<int>(q);
  params.points.resize(q);
  Eigen::VectorXd weights(q);
  for (Eigen::Index m = 0; m < q; ++m) {
    const double* begin = source.knots.data() + 1;
    const double* end = source.knots.data() + ne;  // last interior breakpoint + 1
    const Eigen::Index j = std::upper_bound(begin, end, rule.points[m]) - begin;
    const double offset =
        (rule.points[m] - source.knots[j]) / source.element_length(j);
    const double ratio = target.element_length(j) / source.element_length(j);
    params.points[m] = target.knots[j] + offset * target.element_length(j);
    weights[m] = rule.weights[m] * ratio;
  }
  params.weights = weights.head(q - 1);
  return params;
}

FreeParams stretch_init(const QuadratureRule& uniform_rule, const Partition& target) {
  return transfer_init(uniform_rule, uniform_partition(target.element_count()), target);
}

double learning_rate(int point_count, double constant) {
  check_point_count(point_count);
  if (point_count < 2) return constant;
  return constant / (point_count * std::log(static_cast<double>(point_count)));
}

OptimizerState make_optimizer_state(Eigen::Index parameter_count) {
  OptimizerState state;
  state.first_moment = Eigen::VectorXd::Zero(parameter_count);
  state.second_moment = Eigen::VectorXd::Zero(parameter_count);
  return state;
}

void yogi_step(OptimizerState& state, Eigen::VectorXd& parameters,
               const Eigen::VectorXd& gradient, double learning_rate,
               const YogiConfig& config) {
  const Eigen::Index n = parameters.size();
  if (gradient.size() != n || state.first_moment.size() != n ||
      state.second_moment.size() != n) {
    throw std::invalid_argument("optimizer state does not match the parameter count");
  }
  state.step_count += 1;
  state.first_moment = config.beta1 * state.first_moment + (1.0 - config.beta1) * gradient;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g2 = gradient[i] * gradient[i];
    const double diff = state.second_moment[i] - g2;
    const double sign = static_cast<double>(diff > 0.0) - static_cast<double>(diff < 0.0);
    state.second_moment[i] -= (1.0 - config.beta2) * sign * g2;
  }
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step_count));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step_count));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m_hat = state.first_moment[i] / correction1;
    const double v_hat = state.second_moment[i] / correction2;
    parameters[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

SearchResult search(const LossContext& context, FreeParams start, const SearchConfig& config) {
  FreeParams params = std::move(start);
  const int q = params.point_count;
  const int fx = free_point_count(params.mode, q);
  const int fw = free_weight_count(params.mode, q);
  OptimizerState state = make_optimizer_state(fx + fw);
  const double lr = learning_rate(q, config.lr_constant);

  SearchResult result;
  QuadratureRule rule = expand(params);
  LossEvaluation eval = evaluate_loss(context, rule);
  result.initial_loss = std::sqrt(std::max(eval.squared, 0.0));

  long epoch = 0;
  while (true) {
    const double loss = std::sqrt(std::max(eval.squared, 0.0));
    if (loss < config.stop_loss || eval.max_rel_residual <= config.stop_exactness) break;
    if (epoch >= config.max_epochs) break;

    const Eigen::VectorXd grad = pullback_gradient(params, eval.gradient);
    if (!grad.allFinite()) break;

    Eigen::VectorXd theta(fx + fw);
    theta.head(fx) = params.points;
    theta.tail(fw) = params.weights;
    yogi_step(state, theta, grad, lr, config.yogi);
    params.points =
        theta.head(fx).cwiseMax(kPointMargin).cwiseMin(1.0 - kPointMargin);
    params.weights = theta.tail(fw);
    if (!parameters_ordered(params)) restore_ordering(params, state);

    ++epoch;
    rule = expand(params);
    eval = evaluate_loss(context, rule);
  }

  result.rule = std::move(rule);
  result.final_loss = std::sqrt(std::max(eval.squared, 0.0));
  result.max_rel_error = eval.max_rel_residual;
  result.epochs = epoch;
  result.converged = eval.max_rel_residual <= config.exactness_tolerance;
  return result;
}

SearchResult search(const SplineSpace& integrand, FreeParams start,
                    const SearchConfig& config) {
  return search(build_loss_context(integrand), std::move(start), config);
}

std::vector<ChainLink> discover_uniform_chain(int degree, int continuity,
                                              Eigen::Index max_elements,
                                              const SearchConfig& config) {
  if (max_elements < 2) {
    throw std::invalid_argument("refinement chains start at two elements");
  }
  std::vector<ChainLink> links;
  links.reserve(static_cast<std::size_t>(max_elements - 1));
  bool stalled = false;
  for (Eigen::Index ne = 2; ne <= max_elements; ++ne) {
    ChainLink link;
    link.element_count = ne;
    if (continuity > 0 && stalled) {
      link.skipped = true;
      links.push_back(std::move(link));
      continue;
    }
    const int q = optimal_point_count(degree, continuity, ne);
    FreeParams start;
    if (continuity == 0) {
      start = midpoint_init(q);
    } else if (ne == 2) {
      start = symmetric_equispaced_init(q);
    } else {
      start = refine_init(links.back().result.rule, q, ne);
    }
    const SplineSpace space = make_space(degree, continuity, uniform_partition(ne));
    link.result = search(space, std::move(start), config);
    if (continuity > 0 && !link.result.converged) stalled = true;
    links.push_back(std::move(link));
  }
  return links;
}

SearchResult discover_uniform(int degree, int continuity, Eigen::Index element_count,
                              const SearchConfig& config) {
  if (element_count < 1) {
    throw std::invalid_argument("element count must be positive");
  }
  if (element_count == 1) {
    const int q = optimal_point_count(degree, continuity, 1);
    const SplineSpace space = make_space(degree, continuity, uniform_partition(1));
    return search(space, midpoint_init(q), config);
  }
  if (continuity == 0) {
    // Zero-continuity searches start from the closed-form midpoint layout and
    // need no refinement chain.
    const int q = optimal_point_count(degree, continuity, element_count);
    const SplineSpace space =
        make_space(degree, continuity, uniform_partition(element_count));
    return search(space, midpoint_init(q), config);
  }
  std::vector<ChainLink> links =
      discover_uniform_chain(degree, continuity, element_count, config);
  ChainLink& last = links.back();
  if (last.skipped) {
    throw SearchFailure("refinement chain stalled before the requested element count");
  }
  return std::move(last.result);
}

SearchResult discover_nonuniform(int degree, int continuity, const Partition& target,
                                 const SearchConfig& config) {
  const SearchResult uniform =
      discover_uniform(degree, continuity, target.element_count(), config);
  if (!uniform.converged) {
    throw SearchFailure("uniform-mesh rule did not converge; cannot seed the search");
  }
  return discover_nonuniform(degree, continuity, target, uniform.rule, config);
}

SearchResult discover_nonuniform(int degree, int continuity, const Partition& target,
                                 const QuadratureRule& uniform_rule,
                                 const SearchConfig& config) {
  const Eigen::Index ne = target.element_count();
  SearchResult current;
  current.rule = uniform_rule;
  const int stages = std::max(1, config.continuation_stages);
  Partition previous = uniform_partition(ne);
  for (int s = 1; s <= stages; ++s) {
    const double t = static_cast<double>(s) / stages;
    const Partition stage =
        s == stages
            ? target
            : make_partition(
                  ((1.0 - t) * uniform_partition(ne).knots + t * target.knots).eval());
    FreeParams start = transfer_init(current.rule, previous, stage);
    current = search(make_space(degree, continuity, stage), std::move(start), config);
    if (!current.converged) {
      throw SearchFailure("continuation stalled at stage " + std::to_string(s) + " of " +
                          std::to_string(stages));
    }
    previous = stage;
  }
  return current;
}

}  // namespace splinequad
