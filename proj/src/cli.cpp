#include "splinequad/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "splinequad/casestudies.hpp"
#include "splinequad/discovery.hpp"
#include "splinequad/io.hpp"
#include "splinequad/loss.hpp"
#include "splinequad/quadrature.hpp"
#include "splinequad/splines.hpp"

namespace splinequad {

namespace {

namespace fs = std::filesystem;

constexpr int kExitSuccess = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitUsage = 2;

SearchConfig load_search_config(const std::string& config_path) {
  if (!config_path.empty()) return read_search_config(config_path);
  if (const char* env = std::getenv("SPLINEQUAD_CONFIG"); env != nullptr && *env != '\0') {
    return read_search_config(env);
  }
  return SearchConfig{};
}

std::string rule_filename(int degree, int continuity, Eigen::Index element_count) {
  std::ostringstream name;
  name << "rule_d" << degree << "_k" << continuity << "_ne" << element_count << ".json";
  return name.str();
}

struct DiscoverOptions {
  int degree = 2;
  int continuity = 0;
  Eigen::Index elements = 2;
  std::string partition_file;
  std::string output;
  std::string config_file;
};

int run_discover(const DiscoverOptions& opt) {
  const SearchConfig config = load_search_config(opt.config_file);
  const Partition partition = opt.partition_file.empty()
                                  ? uniform_partition(opt.elements)
                                  : read_partition(opt.partition_file);
  SearchResult result;
  if (opt.partition_file.empty()) {
    result = discover_uniform(opt.degree, opt.continuity, partition.element_count(), config);
  } else {
    result = discover_nonuniform(opt.degree, opt.continuity, partition, config);
  }
  const RuleRecord record = make_rule_record(opt.degree, opt.continuity, partition, result);
  if (opt.output.empty()) {
    write_rule_json(std::cout, record);
  } else {
    write_rule_json(fs::path(opt.output), record);
  }
  std::cerr << "points=" << result.rule.count() << " epochs=" << result.epochs
            << " max_rel_error=" << result.max_rel_error
            << (result.converged ? " converged" : " NOT converged") << '\n';
  return result.converged ? kExitSuccess : kExitNotConverged;
}

struct VerifyOptions {
  std::string rule_file;
  double tolerance = 1e-12;
};

int run_verify(const VerifyOptions& opt) {
  const RuleRecord record = read_rule_json(opt.rule_file);
  const Partition partition = record_partition(record);
  const SplineSpace space = make_space(record.degree, record.continuity, partition);
  const QuadratureRule rule = record_rule(record);
  validate_rule(rule, 1e-9);

  const ExactnessReport direct = verify_exactness(rule, space);
  const QuadratureRule reference = elementwise_gauss(space.degree + 1, partition);
  const ExactnessReport baseline = verify_exactness(reference, space);

  double max_diff = 0.0;
  for (Eigen::Index i = 0; i < direct.errors.size(); ++i) {
    const double diff =
        std::abs(direct.errors[i] - baseline.errors[i]) / basis_integral(space, i);
    max_diff = std::max(max_diff, diff);
  }

  std::cout << "points " << rule.count() << " of " << reference.count()
            << " element-wise Gauss points\n"
            << "max relative error vs closed-form integrals: " << direct.max_rel_error
            << " (worst basis function " << direct.worst_index << ")\n"
            << "max relative deviation vs element-wise Gauss: " << max_diff << '\n';
  return max_diff <= opt.tolerance ? kExitSuccess : kExitNotConverged;
}

struct SavingsOptions {
  std::vector<int> degrees{2, 4, 8};
  std::vector<long> elements{20, 50};
};

int run_savings(const SavingsOptions& opt) {
  std::printf("%6s %8s %4s %14s %14s %9s\n", "degree", "elements", "dim", "elementwise",
              "optimal", "savings");
  for (const long ne : opt.elements) {
    for (const int p : opt.degrees) {
      for (int dim = 1; dim <= 3; ++dim) {
        const SavingsRow row = savings_row(p, ne, dim);
        std::printf("%6d %8ld %4d %14lld %14lld %8.1f%%\n", p, ne, dim,
                    row.elementwise_points, row.optimal_points, 100.0 * row.savings);
      }
    }
  }
  return kExitSuccess;
}

struct LaplaceCliOptions {
  int degree = 2;
  Eigen::Index elements = 10;
  std::string partition_file;
  std::string source = "ewg";
  Eigen::Index block_size = 0;
  Eigen::Index normalization = 0;
  std::string output;
  std::string config_file;
};

int run_laplace(const LaplaceCliOptions& opt) {
  LaplaceOptions options;
  options.degree = opt.degree;
  options.partition = opt.partition_file.empty() ? uniform_partition(opt.elements)
                                                 : read_partition(opt.partition_file);
  if (opt.source == "ewg") {
    options.source = RuleSource::Elementwise;
  } else if (opt.source == "optimal") {
    options.source = RuleSource::Optimal;
  } else if (opt.source == "blocks") {
    options.source = RuleSource::OptimalBlocks;
  } else {
    throw CLI::ValidationError("--source must be ewg, optimal, or blocks");
  }
  options.block_size = opt.block_size;
  options.normalization = opt.normalization;
  options.search = load_search_config(opt.config_file);

  const LaplaceStudy study = laplace_study(options);
  if (opt.output.empty()) {
    write_spectrum_csv(std::cout, study.spectrum);
  } else {
    write_spectrum_csv(fs::path(opt.output), study.spectrum);
  }
  std::cerr << "dofs=" << study.dof_count << " rule_points=" << study.rule.count()
            << " max_ev_err=" << study.spectrum.errors.cwiseAbs().maxCoeff()
            << (study.rule_converged ? "" : " (rule NOT converged)") << '\n';
  return study.rule_converged ? kExitSuccess : kExitNotConverged;
}

struct SweepOptions {
  int min_degree = 1;
  int max_degree = 3;
  Eigen::Index max_elements = 5;
  std::string out_dir = "rules";
  std::string summary;
  unsigned workers = 0;
  bool fresh = false;
  std::string config_file;
};

std::vector<SweepRow> run_chain(int degree, int continuity, const SweepOptions& opt,
                                const SearchConfig& config, std::mutex& log_mutex,
                                std::atomic<long>& failures) {
  std::vector<SweepRow> rows;
  QuadratureRule previous;
  bool have_previous = false;
  bool stalled = false;
  for (Eigen::Index ne = 2; ne <= opt.max_elements; ++ne) {
    SweepRow row;
    row.degree = degree;
    row.continuity = continuity;
    row.element_count = ne;
    row.point_count = optimal_point_count(degree, continuity, ne);
    const fs::path path = fs::path(opt.out_dir) / rule_filename(degree, continuity, ne);

    bool loaded = false;
    if (!opt.fresh && fs::exists(path)) {
      try {
        const RuleRecord record = read_rule_json(path);
        row.epochs = record.epochs;
        row.converged = record.converged;
        if (record.converged) {
          previous = record_rule(record);
          have_previous = true;
        } else if (continuity > 0) {
          stalled = true;
        }
        loaded = true;
      } catch (const std::exception&) {
        loaded = false;  // unreadable file: recompute it
      }
    }

    if (!loaded) {
      if (continuity > 0 && stalled) {
        row.skipped = true;
      } else {
        FreeParams start;
        if (continuity == 0) {
          start = midpoint_init(row.point_count);
        } else if (have_previous) {
          start = refine_init(previous, row.point_count, ne);
        } else {
          start = symmetric_equispaced_init(row.point_count);
        }
        const Partition partition = uniform_partition(ne);
        const SplineSpace space = make_space(degree, continuity, partition);
        const SearchResult result = search(space, std::move(start), config);
        row.epochs = result.epochs;
        row.converged = result.converged;
        write_rule_json(path, make_rule_record(degree, continuity, partition, result));
        if (result.converged) {
          previous = result.rule;
          have_previous = true;
        } else if (continuity > 0) {
          stalled = true;
        }
      }
    }

    if (!row.converged) failures.fetch_add(1);
    {
      const std::lock_guard<std::mutex> guard(log_mutex);
      std::cerr << "d=" << degree << " k=" << continuity << " ne=" << ne;
      if (row.skipped) {
        std::cerr << " skipped\n";
      } else {
        std::cerr << " epochs=" << row.epochs
                  << (row.converged ? " converged" : " NOT converged")
                  << (loaded ? " (resumed)" : "") << '\n';
      }
    }
    rows.push_back(row);
  }
  return rows;
}

int run_sweep(const SweepOptions& opt) {
  if (opt.min_degree < 1 || opt.max_degree < opt.min_degree || opt.max_elements < 2) {
    throw CLI::ValidationError("need 1 <= min-degree <= max-degree and max-elements >= 2");
  }
  fs::create_directories(opt.out_dir);
  const SearchConfig config = load_search_config(opt.config_file);

  std::vector<std::pair<int, int>> chains;
  for (int d = opt.min_degree; d <= opt.max_degree; ++d) {
    for (int k = 0; k < d; ++k) chains.emplace_back(d, k);
  }

  std::vector<std::vector<SweepRow>> chain_rows(chains.size());
  std::atomic<std::size_t> next{0};
  std::atomic<long> failures{0};
  std::mutex log_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= chains.size()) return;
      const auto [d, k] = chains[index];
      chain_rows[index] = run_chain(d, k, opt, config, log_mutex, failures);
    }
  };

  unsigned workers = opt.workers > 0 ? opt.workers
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(chains.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& thread : pool) thread.join();

  std::vector<SweepRow> rows;
  long skipped = 0;
  for (const std::vector<SweepRow>& chunk : chain_rows) {
    for (const SweepRow& row : chunk) {
      if (row.skipped) ++skipped;
      rows.push_back(row);
    }
  }
  if (!opt.summary.empty()) write_sweep_csv(opt.summary, rows);

  std::cerr << rows.size() << " cases, " << failures.load() << " not converged (" << skipped
            << " skipped)\n";
  return failures.load() == 0 ? kExitSuccess : kExitNotConverged;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"discovers and applies minimal exact quadrature rules for spline spaces"};
  app.require_subcommand(1);

  DiscoverOptions discover_opt;
  CLI::App* discover =
      app.add_subcommand("discover", "find the minimal rule for one spline space");
  discover->add_option("-d,--degree", discover_opt.degree, "spline degree")->required();
  discover->add_option("-k,--continuity", discover_opt.continuity,
                       "continuity at interior breakpoints")
      ->required();
  discover->add_option("-n,--elements", discover_opt.elements, "uniform element count");
  discover->add_option("-p,--partition", discover_opt.partition_file,
                       "breakpoint file for a non-uniform mesh");
  discover->add_option("-o,--output", discover_opt.output, "rule JSON path (default stdout)");
  discover->add_option("-c,--config", discover_opt.config_file, "search settings file");

  SweepOptions sweep_opt;
  CLI::App* sweep = app.add_subcommand("sweep", "discover rules for a whole family of spaces");
  sweep->add_option("--min-degree", sweep_opt.min_degree, "lowest degree (default 1)");
  sweep->add_option("-d,--max-degree", sweep_opt.max_degree, "highest degree")->required();
  sweep->add_option("-n,--max-elements", sweep_opt.max_elements, "highest element count")
      ->required();
  sweep->add_option("-o,--out-dir", sweep_opt.out_dir, "directory for rule JSON files");
  sweep->add_option("-s,--summary", sweep_opt.summary, "summary CSV path");
  sweep->add_option("-j,--workers", sweep_opt.workers, "worker threads (default: hardware)");
  sweep->add_flag("--fresh", sweep_opt.fresh, "recompute cases even if a rule file exists");
  sweep->add_option("-c,--config", sweep_opt.config_file, "search settings file");

  VerifyOptions verify_opt;
  CLI::App* verify =
      app.add_subcommand("verify", "check a stored rule against element-wise Gauss");
  verify->add_option("rule", verify_opt.rule_file, "rule JSON file")->required();
  verify->add_option("-t,--tolerance", verify_opt.tolerance,
                     "max allowed relative deviation");

  SavingsOptions savings_opt;
  CLI::App* savings =
      app.add_subcommand("savings", "compare optimal and element-wise point counts");
  savings->add_option("-d,--degree", savings_opt.degrees, "solution space degrees");
  savings->add_option("-n,--elements", savings_opt.elements, "element counts per direction");

  LaplaceCliOptions laplace_opt;
  CLI::App* laplace =
      app.add_subcommand("laplace", "eigenvalue study for the 1D Laplace operator");
  laplace->add_option("-d,--degree", laplace_opt.degree, "solution space degree")->required();
  laplace->add_option("-n,--elements", laplace_opt.elements, "uniform element count");
  laplace->add_option("-p,--partition", laplace_opt.partition_file,
                      "breakpoint file for a non-uniform mesh");
  laplace->add_option("-s,--source", laplace_opt.source,
                      "quadrature source: ewg, optimal, or blocks");
  laplace->add_option("-b,--block-size", laplace_opt.block_size,
                      "elements per C0 block (source=blocks)");
  laplace->add_option("--normalization", laplace_opt.normalization,
                      "mode-number normalization override");
  laplace->add_option("-o,--output", laplace_opt.output, "spectrum CSV path (default stdout)");
  laplace->add_option("-c,--config", laplace_opt.config_file, "search settings file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitUsage;
  }

  try {
    if (discover->parsed()) return run_discover(discover_opt);
    if (sweep->parsed()) return run_sweep(sweep_opt);
    if (verify->parsed()) return run_verify(verify_opt);
    if (savings->parsed()) return run_savings(savings_opt);
    if (laplace->parsed()) return run_laplace(laplace_opt);
  } catch (const SearchFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace splinequad
