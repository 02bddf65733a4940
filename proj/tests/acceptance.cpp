// Acceptance checklist: ten end-to-end checks with pinned tolerances, one
// verdict line each. Exit code is the number of failed gating checks
// (check 9 is reported but does not gate).
#include "splinequad/casestudies.hpp"
#include "splinequad/discovery.hpp"
#include "splinequad/loss.hpp"
#include "splinequad/quadrature.hpp"
#include "splinequad/splines.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

using namespace splinequad;

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Refinement chains shared between checks, keyed by (degree, continuity).
class ChainCache {
 public:
  const std::vector<ChainLink>& chain(int degree, int continuity, Eigen::Index max_ne) {
    auto& slot = chains_[{degree, continuity}];
    if (slot.size() < static_cast<size_t>(max_ne - 1)) {
      slot = discover_uniform_chain(degree, continuity, max_ne, SearchConfig{});
    }
    return slot;
  }

  const SearchResult& rule(int degree, int continuity, Eigen::Index ne) {
    return chain(degree, continuity, ne)[ne - 2].result;
  }

 private:
  std::map<std::pair<int, int>, std::vector<ChainLink>> chains_;
};

ChainCache cache;
int gating_failures = 0;

void report(int id, bool pass, bool gating, double seconds, const std::string& detail) {
  const char* verdict = pass ? "PASS" : (gating ? "FAIL" : "FAIL (non-gating)");
  std::printf("criterion %2d: %-18s %7.2f s  %s\n", id, verdict, seconds, detail.c_str());
  std::fflush(stdout);
  if (!pass && gating) ++gating_failures;
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  return buffer;
}

// --- 1: point-count formula and savings table -------------------------------

void check_point_counts() {
  Stopwatch watch;
  const struct {
    int p;
    Eigen::Index ne;
    long long counts[3];  // optimal points in 1, 2, 3 space dimensions
    double pct[3];
  } table[] = {
      {2, 20, {41, 1681, 68921}, {31.7, 53.3, 68.1}},
      {2, 50, {101, 10201, 1030301}, {32.7, 54.7, 69.5}},
      {4, 20, {62, 3844, 238328}, {38.0, 61.6, 76.2}},
      {4, 50, {152, 23104, 3511808}, {39.2, 63.0, 77.5}},
      {8, 20, {104, 10816, 1124864}, {42.2, 66.6, 80.7}},
      {8, 50, {254, 64516, 16387064}, {43.6, 68.1, 82.0}},
  };
  int bad = 0;
  for (const auto& row : table) {
    for (int dim = 1; dim <= 3; ++dim) {
      const SavingsRow sr = savings_row(row.p, row.ne, dim);
      if (sr.optimal_points != row.counts[dim - 1]) ++bad;
      if (std::abs(100.0 * sr.savings - row.pct[dim - 1]) > 0.1) ++bad;
    }
  }
  const double time = watch.seconds();
  report(1, bad == 0 && time < 1.0, true, time,
         fmt("18 rule sizes and savings percentages: %d mismatches", bad));
}

// --- 2: desk-scale sweep ----------------------------------------------------

std::vector<long> sweep_epochs;  // kept for check 9

void check_desk_sweep() {
  Stopwatch watch;
  int cases = 0, converged = 0;
  std::ostringstream failures;
  for (int d = 2; d <= 8; ++d) {
    for (int k = 0; k < d; ++k) {
      // integrand pairs reused at ne = 50 later; computing once saves a rerun
      const bool deep = (d == 4 && k == 0) || (d == 6 && k == 1) || (d == 8 && k == 2);
      const std::vector<ChainLink>& links = cache.chain(d, k, deep ? 50 : 12);
      for (Eigen::Index ne = 2; ne <= 12; ++ne) {
        const ChainLink& link = links[ne - 2];
        ++cases;
        const bool ok = !link.skipped && link.result.converged &&
                        link.result.max_rel_error <= 1e-12;
        if (ok) {
          ++converged;
        } else {
          failures << " (" << d << "," << k << "," << ne << ")";
        }
        if (!link.skipped) sweep_epochs.push_back(link.result.epochs);
      }
    }
  }
  const bool pass = cases == 385 && converged >= 382 &&  // at least 99%
                    watch.seconds() < 1800.0;
  std::string detail = fmt("%d/%d cases at 1e-12 within 10000 epochs", converged, cases);
  if (converged < cases) detail += "; failed:" + failures.str();
  report(2, pass, true, watch.seconds(), detail);
}

// --- 3: single-element rules against an independent Gauss solver ------------

void check_gauss_oracle() {
  Stopwatch watch;
  double worst = 0.0;
  for (int d : {1, 3, 5, 7}) {
    const SearchResult result = discover_uniform(d, 0, 1, SearchConfig{});
    const auto [points, weights] = oracles::gauss_bisection((d + 1) / 2);
    if (!result.converged) {
      report(3, false, true, watch.seconds(), fmt("degree %d did not converge", d));
      return;
    }
    worst = std::max(worst, (result.rule.points - points).cwiseAbs().maxCoeff());
    worst = std::max(worst, (result.rule.weights - weights).cwiseAbs().maxCoeff());
  }
  report(3, worst <= 1e-8, true, watch.seconds(),
         fmt("largest node/weight gap to bisection solver: %.2e", worst));
}

// --- helpers for randomized checks ------------------------------------------

SplineSpace random_space(std::mt19937& rng) {
  const int d = std::uniform_int_distribution<int>(1, 8)(rng);
  const int k = std::uniform_int_distribution<int>(0, d - 1)(rng);
  const Eigen::Index ne = std::uniform_int_distribution<int>(2, 6)(rng);
  if (std::bernoulli_distribution(0.5)(rng)) {
    return make_space(d, k, uniform_partition(ne));
  }
  Eigen::VectorXd breaks(ne + 1);
  breaks[0] = 0.0;
  breaks[ne] = 1.0;
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (Eigen::Index j = 1; j < ne; ++j) breaks[j] = unif(rng);
  std::sort(breaks.data() + 1, breaks.data() + ne);
  for (Eigen::Index j = 1; j < ne; ++j) {  // enforce a minimal gap
    breaks[j] = std::max(breaks[j], breaks[j - 1] + 0.01);
  }
  return make_space(d, k, make_partition(breaks));
}

QuadratureRule random_rule(int count, std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(0.02, 0.98);
  QuadratureRule rule;
  rule.points.resize(count);
  for (int m = 0; m < count; ++m) rule.points[m] = unif(rng);
  std::sort(rule.points.data(), rule.points.data() + count);
  for (int m = 1; m < count; ++m) {
    rule.points[m] = std::max(rule.points[m], rule.points[m - 1] + 1e-4);
  }
  rule.weights.resize(count);
  for (int m = 0; m < count; ++m) rule.weights[m] = unif(rng);
  rule.weights /= rule.weights.sum();
  return rule;
}

// --- 4: analytic gradients against central differences ----------------------

void check_gradients() {
  Stopwatch watch;
  std::mt19937 rng(20260822);
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    const LossContext ctx = build_loss_context(random_space(rng));
    for (int trial = 0; trial < 5; ++trial) {
      const int q = std::uniform_int_distribution<int>(3, 9)(rng);
      const QuadratureRule rule = random_rule(q, rng);
      const LossGradient grad = loss_squared_gradient(ctx, rule);
      const double scale = std::max(grad.d_points.cwiseAbs().maxCoeff(),
                                    grad.d_weights.cwiseAbs().maxCoeff());
      for (int m = 0; m < q; ++m) {
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
        const std::pair<double, double> checks[] = {
            {grad.d_points[m], oracles::central_diff(by_point, rule.points[m], 1e-7)},
            {grad.d_weights[m], oracles::central_diff(by_weight, rule.weights[m], 1e-7)},
        };
        for (const auto& [analytic, numeric] : checks) {
          if (std::abs(analytic) < 1e-10 * scale) continue;  // below FD resolution
          worst = std::max(worst, oracles::rel_gap(analytic, numeric));
        }
      }
    }
  }
  report(4, worst <= 1e-6, true, watch.seconds(),
         fmt("worst relative gradient gap over 50 rules: %.2e", worst));
}

// --- 5: the loss bounds every spline's quadrature error ---------------------

void check_dual_norm() {
  Stopwatch watch;
  std::mt19937 rng(5150);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst_overshoot = 0.0, worst_equality = 0.0;
  for (int s = 0; s < 20; ++s) {
    const LossContext ctx = build_loss_context(random_space(rng));
    const QuadratureRule rule = random_rule(4, rng);
    const Eigen::VectorXd r = residuals(ctx, rule);
    const double loss = loss_value(ctx, rule);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd c(ctx.space.dimension());
      for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = gauss(rng);
      const double error = std::abs(c.dot(r));  // quadrature error of sum c_i B_i
      const double bound = loss * spline_l2_norm(ctx, c);
      worst_overshoot = std::max(worst_overshoot, (error - bound) / bound);
    }
    const Eigen::VectorXd maximizer = worst_case_spline(ctx, rule);
    worst_equality =
        std::max(worst_equality, std::abs(std::abs(maximizer.dot(r)) - loss) / loss);
  }
  report(5, worst_overshoot <= 1e-12 && worst_equality <= 1e-8, true, watch.seconds(),
         fmt("100 splines within the bound (worst overshoot %.1e); "
             "maximizer equality gap %.2e",
             worst_overshoot, worst_equality));
}

// --- 6: spectra from tuned rules match element-wise Gauss -------------------

Eigen::VectorXd spectrum_errors(const SplineSpace& solution, const QuadratureRule& rule) {
  const SystemMatrices reduced = dirichlet_reduce(assemble(solution, rule));
  return ev_errors(generalized_eigenvalues(reduced.stiffness, reduced.mass)).errors;
}

void check_spectra_match() {
  Stopwatch prep_watch;
  for (int p : {2, 3, 4, 5}) cache.chain(2 * p, p - 2, 50);
  const double prep = prep_watch.seconds();
  Stopwatch watch;
  double worst = 0.0;
  for (int p : {2, 3, 4, 5}) {
    const SearchResult& tuned = cache.rule(2 * p, p - 2, 50);
    if (!tuned.converged) {
      report(6, false, true, watch.seconds(), fmt("integrand rule for p=%d missing", p));
      return;
    }
    const SplineSpace solution = make_space(p, p - 1, uniform_partition(50));
    const Eigen::VectorXd base =
        spectrum_errors(solution, elementwise_gauss(p + 1, solution.partition));
    const Eigen::VectorXd test = spectrum_errors(solution, tuned.rule);
    worst = std::max(worst, (base - test).cwiseAbs().maxCoeff());
  }
  report(6, worst <= 1e-9 && watch.seconds() < 60.0, true, watch.seconds(),
         fmt("worst per-mode eigenvalue-error gap: %.2e (rule prep %.1f s)", worst, prep));
}

// --- 7: eigenvalue convergence rates ----------------------------------------

void check_convergence_rates() {
  Stopwatch watch;
  std::ostringstream detail;
  bool pass = true;
  for (int p : {2, 3}) {
    Eigen::Vector3d log_ne, log_err;
    int at = 0;
    for (Eigen::Index ne : {10, 20, 40}) {
      const SearchResult& tuned = cache.rule(2 * p, p - 2, ne);
      pass = pass && tuned.converged;
      const SplineSpace solution = make_space(p, p - 1, uniform_partition(ne));
      const Eigen::VectorXd errors = spectrum_errors(solution, tuned.rule);
      log_ne[at] = std::log(static_cast<double>(ne));
      log_err[at] = std::log(std::abs(errors[0]));
      ++at;
    }
    // least-squares slope of log(error) against log(elements)
    const Eigen::Vector3d dx = log_ne - Eigen::Vector3d::Constant(log_ne.mean());
    const Eigen::Vector3d dy = log_err - Eigen::Vector3d::Constant(log_err.mean());
    const double slope = dx.dot(dy) / dx.squaredNorm();
    const double order = -slope;
    pass = pass && std::abs(order - 2.0 * p) <= 0.15 * 2.0 * p;
    detail << (p == 2 ? "" : "; ") << "p=" << p << " lowest-mode order " << order
           << " (target " << 2 * p << ")";
  }
  report(7, pass, true, watch.seconds(), detail.str());
}

// --- 8: graded 20-element partition end to end ------------------------------

void check_graded_partition() {
  Stopwatch watch;
  const Partition target = benchmark_nonuniform_partition();
  bool pass = true;
  std::ostringstream detail;
  for (int p : {2, 3, 4}) {
    const int d = 2 * p, k = p - 2;
    const SearchResult& seed = cache.rule(d, k, target.element_count());
    SearchResult tuned;
    try {
      tuned = seed.converged
                  ? discover_nonuniform(d, k, target, seed.rule, SearchConfig{})
                  : discover_nonuniform(d, k, target, SearchConfig{});
    } catch (const SearchFailure& failure) {
      pass = false;
      detail << (p == 2 ? "" : "; ") << "p=" << p << " search failed: " << failure.what();
      continue;
    }
    const bool exact = tuned.converged && tuned.max_rel_error <= 1e-12;
    const SplineSpace solution = make_space(p, p - 1, target);
    const Eigen::VectorXd base =
        spectrum_errors(solution, elementwise_gauss(p + 1, target));
    const Eigen::VectorXd test = spectrum_errors(solution, tuned.rule);
    const double gap = (base - test).cwiseAbs().maxCoeff();
    pass = pass && exact && gap <= 1e-9;
    detail << (p == 2 ? "" : "; ")
           << fmt("p=%d rule error %.1e, spectra gap %.1e", p, tuned.max_rel_error, gap);
  }
  report(8, pass, true, watch.seconds(), detail.str());
}

// --- 9 (non-gating): epoch counts look like the published experiments -------

void check_epoch_sanity() {
  Stopwatch watch;
  if (sweep_epochs.empty()) {
    report(9, false, false, watch.seconds(), "sweep produced no epoch counts");
    return;
  }
  std::vector<long> epochs = sweep_epochs;
  std::nth_element(epochs.begin(), epochs.begin() + epochs.size() / 2, epochs.end());
  const long median = epochs[epochs.size() / 2];
  report(9, median >= 100 && median <= 5000, false, watch.seconds(),
         fmt("median search length %ld epochs over %zu cases (window [100, 5000])",
             median, epochs.size()));
}

// --- 10: curve geometry kernels ---------------------------------------------

void check_curve_geometry() {
  Stopwatch watch;
  const BSplineCurve curve = tschirnhausen_curve();
  const CurvePoint start = eval_curve(curve, 0.0);
  const CurvePoint end = eval_curve(curve, 1.0);
  const bool ends = start.position[0] == 0.0 && start.position[1] == 0.0 &&
                    end.position[0] == 0.9 && end.position[1] == 0.0;
  double worst = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double x = static_cast<double>(i) / 101.0;
    const CurvePoint at = eval_curve(curve, x);
    // wide step: exact for the piecewise-quadratic curve as long as the
    // stencil stays inside one span (nearest breakpoint is 2e-3 away)
    const double h = 1e-3;
    const CurvePoint lo = eval_curve(curve, x - h);
    const CurvePoint hi = eval_curve(curve, x + h);
    const Eigen::Vector2d d1 = (hi.position - lo.position) / (2.0 * h);
    const Eigen::Vector2d d2 = (hi.position - 2.0 * at.position + lo.position) / (h * h);
    const double cross = d1[0] * d2[1] - d1[1] * d2[0];
    const double reference = std::abs(cross) / std::pow(d1.norm(), 3);
    worst = std::max(worst, oracles::rel_gap(at.curvature, reference));
  }
  report(10, ends && worst <= 1e-6, true, watch.seconds(),
         fmt("endpoints %s; worst curvature gap to finite differences %.2e",
             ends ? "exact" : "WRONG", worst));
}

}  // namespace

int main() {
  check_point_counts();
  check_desk_sweep();
  check_gauss_oracle();
  check_gradients();
  check_dual_norm();
  check_spectra_match();
  check_convergence_rates();
  check_graded_partition();
  check_epoch_sanity();
  check_curve_geometry();
  std::printf("%d gating failure(s)\n", gating_failures);
  return gating_failures;
}
