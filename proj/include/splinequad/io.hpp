#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "splinequad/casestudies.hpp"
#include "splinequad/discovery.hpp"
#include "splinequad/quadrature.hpp"
#include "splinequad/splines.hpp"

namespace splinequad {

/// A discovered rule together with the space it integrates and how the
/// search went; the on-disk JSON mirrors these fields.
struct RuleRecord {
  int degree = 0;
  int continuity = 0;
  Eigen::Index element_count = 0;
  Eigen::VectorXd breakpoints;
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
  double max_rel_error = 0.0;
  long epochs = 0;
  bool converged = false;
};

RuleRecord make_rule_record(int degree, int continuity, const Partition& partition,
                            const SearchResult& result);
QuadratureRule record_rule(const RuleRecord& record);
Partition record_partition(const RuleRecord& record);

/// Doubles survive the round trip bit-exactly (shortest-round-trip formatting).
void write_rule_json(std::ostream& stream, const RuleRecord& record);
void write_rule_json(const std::filesystem::path& path, const RuleRecord& record);
RuleRecord read_rule_json(const std::filesystem::path& path);

/// Whitespace-separated ascending breakpoints including both endpoints.
Partition read_partition(const std::filesystem::path& path);
void write_partition(const std::filesystem::path& path, const Partition& partition);

/// `key = value` lines ('#' starts a comment); unknown keys are rejected.
/// Keys: lr_constant, max_epochs, stop_loss, stop_exactness,
/// exactness_tolerance, continuation_stages, beta1, beta2, epsilon.
SearchConfig parse_search_config(std::istream& stream);
SearchConfig read_search_config(const std::filesystem::path& path);

void write_spectrum_csv(std::ostream& stream, const SpectrumReport& report);
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& report);

/// One sweep case; `skipped` marks chain entries that never ran because an
/// earlier refinement failed.
struct SweepRow {
  int degree = 0;
  int continuity = 0;
  Eigen::Index element_count = 0;
  int point_count = 0;
  long epochs = 0;
  bool converged = false;
  bool skipped = false;
};
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace splinequad
