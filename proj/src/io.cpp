#include "splinequad/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace splinequad {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream stream(path);
  if (!stream) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return stream;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream stream(path);
  if (!stream) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return stream;
}

}  // namespace

RuleRecord make_rule_record(int degree, int continuity, const Partition& partition,
                            const SearchResult& result) {
  RuleRecord record;
  record.degree = degree;
  record.continuity = continuity;
  record.element_count = partition.element_count();
  record.breakpoints = partition.knots;
  record.points = result.rule.points;
  record.weights = result.rule.weights;
  record.max_rel_error = result.max_rel_error;
  record.epochs = result.epochs;
  record.converged = result.converged;
  return record;
}

QuadratureRule record_rule(const RuleRecord& record) {
  return QuadratureRule{record.points, record.weights};
}

Partition record_partition(const RuleRecord& record) {
  return make_partition(record.breakpoints);
}

void write_rule_json(std::ostream& stream, const RuleRecord& record) {
  nlohmann::json j;
  j["degree"] = record.degree;
  j["continuity"] = record.continuity;
  j["elements"] = record.element_count;
  j["partition"] = to_std(record.breakpoints);
  j["points"] = to_std(record.points);
  j["weights"] = to_std(record.weights);
  j["max_rel_error"] = record.max_rel_error;
  j["epochs"] = record.epochs;
  j["converged"] = record.converged;
  stream << j.dump(2) << '\n';
}

void write_rule_json(const std::filesystem::path& path, const RuleRecord& record) {
  std::ofstream stream = open_output(path);
  write_rule_json(stream, record);
}

RuleRecord read_rule_json(const std::filesystem::path& path) {
  nlohmann::json j;
  open_input(path) >> j;
  RuleRecord record;
  record.degree = j.at("degree").get<int>();
  record.continuity = j.at("continuity").get<int>();
  record.element_count = j.at("elements").get<Eigen::Index>();
  record.breakpoints = from_std(j.at("partition").get<std::vector<double>>());
  record.points = from_std(j.at("points").get<std::vector<double>>());
  record.weights = from_std(j.at("weights").get<std::vector<double>>());
  record.max_rel_error = j.at("max_rel_error").get<double>();
  record.epochs = j.value("epochs", 0L);
  record.converged = j.value("converged", false);
  return record;
}

Partition read_partition(const std::filesystem::path& path) {
  std::ifstream stream = open_input(path);
  std::vector<double> values;
  double value = 0.0;
  while (stream >> value) values.push_back(value);
  if (!stream.eof()) {
    throw std::runtime_error("malformed partition file " + path.string());
  }
  return make_partition(from_std(values));
}

void write_partition(const std::filesystem::path& path, const Partition& partition) {
  std::ofstream stream = open_output(path);
  stream << std::setprecision(17);
  for (Eigen::Index j = 0; j < partition.knots.size(); ++j) {
    stream << partition.knots[j] << '\n';
  }
}

SearchConfig parse_search_config(std::istream& stream) {
  SearchConfig config;
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const std::size_t equals = line.find('=');
    if (equals == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  ": expected key = value");
    }
    auto trim = [](std::string s) {
      const std::size_t b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const std::size_t e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, equals));
    const std::string value = trim(line.substr(equals + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  ": expected key = value");
    }
    try {
      if (key == "lr_constant") {
        config.lr_constant = std::stod(value);
      } else if (key == "max_epochs") {
        config.max_epochs = std::stol(value);
      } else if (key == "stop_loss") {
        config.stop_loss = std::stod(value);
      } else if (key == "stop_exactness") {
        config.stop_exactness = std::stod(value);
      } else if (key == "exactness_tolerance") {
        config.exactness_tolerance = std::stod(value);
      } else if (key == "continuation_stages") {
        config.continuation_stages = std::stoi(value);
      } else if (key == "beta1") {
        config.yogi.beta1 = std::stod(value);
      } else if (key == "beta2") {
        config.yogi.beta2 = std::stod(value);
      } else if (key == "epsilon") {
        config.yogi.epsilon = std::stod(value);
      } else {
        throw std::invalid_argument("config line " + std::to_string(line_number) +
                                    ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  ": bad value '" + value + "'");
    }
  }
  return config;
}

SearchConfig read_search_config(const std::filesystem::path& path) {
  std::ifstream stream = open_input(path);
  return parse_search_config(stream);
}

void write_spectrum_csv(std::ostream& stream, const SpectrumReport& report) {
  const auto saved = stream.precision(17);
  stream << "mode,normalized_mode,lambda_h,lambda_exact,ev_err\n";
  for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i) {
    stream << (i + 1) << ',' << report.normalized_modes[i] << ',' << report.eigenvalues[i]
           << ',' << report.exact[i] << ',' << report.errors[i] << '\n';
  }
  stream.precision(saved);
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumReport& report) {
  std::ofstream stream = open_output(path);
  write_spectrum_csv(stream, report);
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream stream = open_output(path);
  stream << "degree,continuity,elements,points,epochs,converged,skipped\n";
  for (const SweepRow& row : rows) {
    stream << row.degree << ',' << row.continuity << ',' << row.element_count << ','
           << row.point_count << ',' << row.epochs << ',' << (row.converged ? 1 : 0) << ','
           << (row.skipped ? 1 : 0) << '\n';
  }
}

}  // namespace splinequad
