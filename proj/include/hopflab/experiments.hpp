#pragma once

// The scaling experiment: energies of the prescribed-degree maps against d,
// a log-log fit, and CSV/JSON reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hopflab/energy.hpp"
#include "hopflab/execution.hpp"

namespace hopflab {

inline constexpr const char* kVersion = "1.0.0";

enum class OutputFormat { Csv, Json };

std::string to_string(OutputFormat f);
OutputFormat parse_format(const std::string& text);

struct ExperimentConfig {
  double s = 0.5;
  std::optional<double> p;  // defaults to 3 / s
  std::vector<std::int64_t> degrees = {1, 2, 4, 5, 7, 9, 16, 25};
  std::int64_t samples_per_estimate = 1'000'000;
  std::uint64_t seed = 20240601;
  std::string output_path;
  OutputFormat format = OutputFormat::Csv;
  Execution execution = Execution::Parallel;

  double exponent() const { return p.value_or(3.0 / s); }
  EnergyParams params() const;
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

// FNV-1a over the canonical JSON of the fields that determine the numbers
// (s, p, degrees, samples, seed), as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

// "1,4,9" or "kmax:N" (the squares 1, 4, ..., N^2).
std::vector<std::int64_t> parse_degrees(const std::string& text);

struct ScalingRow {
  std::int64_t d = 0;
  double energy = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  double s = 0.0;
  double p = 0.0;
  std::uint64_t seed = 0;  // seed of this row's estimate

  bool operator==(const ScalingRow&) const = default;
};

struct ScalingResult {
  ExperimentConfig config;
  std::vector<ScalingRow> rows;  // sorted by d
  // Least squares of log energy on log |d| over rows with |d| >= 2; absent
  // with fewer than two such rows.
  std::optional<double> slope;
  std::optional<double> slope_stderr;  // needs three rows
  std::optional<double> intercept;
  bool partial = false;
  std::string error;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::optional<double> slope_stderr;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Fills slope, slope_stderr and intercept from the rows.
void fit_scaling(ScalingResult& result);

// Estimates E_{s,p}(prescribed_hopf_map(d), S^3) for every configured d. The
// seed of degree d is derived from (config.seed, d) alone. A failing degree
// stops the run; the rows so far are returned with partial = true.
ScalingResult run_scaling(const ExperimentConfig& config);

nlohmann::json to_json(const ScalingResult& r);
ScalingResult scaling_from_json(const nlohmann::json& j);

// Writes the report to `path`, plus `path`.loglog.dat (log |d|, log energy)
// and, for CSV, `path`.meta.json with the version and config hash. Returns
// the paths written. Throws IoError when a file cannot be written.
std::vector<std::string> emit_report(const ScalingResult& r, const std::string& path,
                                     OutputFormat format);

std::string render_csv(const ScalingResult& r);

}  // namespace hopflab
