#pragma once

// The verification suite: one check per property of the construction, each
// reporting what it measured against a configurable tolerance.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hopflab/execution.hpp"

namespace hopflab {

struct VerifyConfig {
  std::uint64_t seed = 20240601;
  std::int64_t samples = 1'000'000;
  // nullopt runs every check; an empty list runs none.
  std::optional<std::vector<std::string>> checks;
  double gradient_tolerance = 1e-6;
  double degree_residual = 0.05;  // for every degree and linking report
  double se_factor = 3.0;
  double ratio_factor = 3.0;
  double se_scaling_tolerance = 0.3;
  std::int64_t degree_grid = 20000;
  int quadrature_resolution = 4;
  Execution execution = Execution::Parallel;

  void validate() const;
};

nlohmann::json to_json(const VerifyConfig& c);
VerifyConfig verify_config_from_json(const nlohmann::json& j);

struct CheckResult {
  std::string id;
  std::string description;
  bool passed = false;
  nlohmann::json measured;
  std::string detail;  // failure reason or error message
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

// Check ids in suite order.
const std::vector<std::string>& verify_check_ids();

// Runs the selected checks; failures are collected, not thrown. Unknown ids
// raise ParameterError before anything runs.
VerifyReport run_verify(const VerifyConfig& config);

nlohmann::json to_json(const VerifyReport& r);
std::string render_table(const VerifyReport& r);

}  // namespace hopflab
