#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hopflab/constructions.hpp"
#include "hopflab/errors.hpp"
#include "hopflab/experiments.hpp"
#include "hopflab/random.hpp"

namespace hopflab {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw ParameterError("unknown format \"" + text + "\" (expected csv or json)");
}

EnergyParams ExperimentConfig::params() const {
  const double q = exponent();
  return {.s = s, .p = q, .n = 3, .critical = std::abs(s * q - 3.0) < 1e-12};
}

void ExperimentConfig::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw ParameterError("config: s must lie in (0, 1)");
  if (!(exponent() > 1.0)) throw ParameterError("config: p must exceed 1");
  if (samples_per_estimate < kMinMcSamples) {
    throw ParameterError("config: samples must be at least " + std::to_string(kMinMcSamples));
  }
  if (degrees.empty()) throw ParameterError("config: degrees must be nonempty");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"s", c.s},
          {"p", c.exponent()},
          {"degrees", c.degrees},
          {"samples", c.samples_per_estimate},
          {"seed", c.seed},
          {"output_path", c.output_path},
          {"format", to_string(c.format)}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.s = j.value("s", c.s);
    if (j.contains("p") && !j.at("p").is_null()) c.p = j.at("p").get<double>();
    if (j.contains("degrees")) {
      const auto& d = j.at("degrees");
      c.degrees = d.is_string() ? parse_degrees(d.get<std::string>()) : d.get<std::vector<std::int64_t>>();
    }
    c.samples_per_estimate = j.value("samples", c.samples_per_estimate);
    c.seed = j.value("seed", c.seed);
    c.output_path = j.value("output_path", c.output_path);
    if (j.contains("format")) c.format = parse_format(j.at("format").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_hash(const ExperimentConfig& c) {
  const nlohmann::json canonical = {{"s", c.s},
                                    {"p", c.exponent()},
                                    {"degrees", c.degrees},
                                    {"samples", c.samples_per_estimate},
                                    {"seed", c.seed}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::vector<std::int64_t> parse_degrees(const std::string& text) {
  std::vector<std::int64_t> out;
  try {
    if (text.rfind("kmax:", 0) == 0) {
      std::size_t used = 0;
      const long long k = std::stoll(text.substr(5), &used);
      if (used != text.size() - 5 || k < 1 || k > 1000) throw ParameterError("");
      for (long long i = 1; i <= k; ++i) out.push_back(i * i);
      return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw ParameterError("");
    }
  } catch (const std::exception&) {
    throw ParameterError("cannot parse degrees \"" + text + "\" (expected 1,4,9 or kmax:N)");
  }
  if (out.empty()) throw ParameterError("degrees must be nonempty");
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit_line: need two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("fit_line: abscissae coincide");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      rss += e * e;
    }
    f.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

void fit_scaling(ScalingResult& result) {
  std::vector<double> x, y;
  for (const auto& row : result.rows) {
    if (std::abs(row.d) >= 2 && row.energy > 0.0) {
      x.push_back(std::log(static_cast<double>(std::abs(row.d))));
      y.push_back(std::log(row.energy));
    }
  }
  result.slope.reset();
  result.slope_stderr.reset();
  result.intercept.reset();
  if (x.size() < 2) return;
  const LineFit f = fit_line(x, y);
  result.slope = f.slope;
  result.intercept = f.intercept;
  result.slope_stderr = f.slope_stderr;
}

ScalingResult run_scaling(const ExperimentConfig& config) {
  config.validate();
  ScalingResult result;
  result.config = config;
  std::vector<std::int64_t> degrees = config.degrees;
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
  const EnergyParams params = config.params();
  for (std::int64_t d : degrees) {
    try {
      const SphereMap u = prescribed_hopf_map(d);
      McOptions o;
      o.samples = config.samples_per_estimate;
      o.seed = mix_seed(config.seed, static_cast<std::uint64_t>(d));
      o.execution = config.execution;
      const EnergyEstimate e = energy_mc(u, params, Region::whole(3), o);
      result.rows.push_back({.d = d,
                             .energy = e.value,
                             .std_error = e.std_error,
                             .n_samples = e.n_samples,
                             .s = params.s,
                             .p = params.p,
                             .seed = o.seed});
    } catch (const Error& e) {
      result.partial = true;
      result.error = "degree " + std::to_string(d) + ": " + e.what();
      break;
    }
  }
  fit_scaling(result);
  return result;
}

nlohmann::json to_json(const ScalingResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"d", row.d},
                    {"energy", row.energy},
                    {"std_error", row.std_error},
                    {"n_samples", row.n_samples},
                    {"s", row.s},
                    {"p", row.p},
                    {"seed", row.seed}});
  }
  return {{"version", kVersion},
          {"config_hash", config_hash(r.config)},
          {"config", to_json(r.config)},
          {"partial", r.partial},
          {"error", r.error},
          {"slope", optional_json(r.slope)},
          {"slope_stderr", optional_json(r.slope_stderr)},
          {"intercept", optional_json(r.intercept)},
          {"rows", rows}};
}

ScalingResult scaling_from_json(const nlohmann::json& j) {
  ScalingResult r;
  try {
    r.config = config_from_json(j.at("config"));
    r.partial = j.at("partial").get<bool>();
    r.error = j.value("error", std::string());
    r.slope = optional_from(j, "slope");
    r.slope_stderr = optional_from(j, "slope_stderr");
    r.intercept = optional_from(j, "intercept");
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({.d = row.at("d").get<std::int64_t>(),
                        .energy = row.at("energy").get<double>(),
                        .std_error = row.at("std_error").get<double>(),
                        .n_samples = row.at("n_samples").get<std::int64_t>(),
                        .s = row.at("s").get<double>(),
                        .p = row.at("p").get<double>(),
                        .seed = row.at("seed").get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("scaling report: ") + e.what());
  }
  return r;
}

std::string render_csv(const ScalingResult& r) {
  std::ostringstream out;
  if (r.partial) out << "# \"partial\": true\n";
  out << "d,energy,std_error,n_samples,s,p,seed\n";
  for (const auto& row : r.rows) {
    out << row.d << ',' << format_double(row.energy) << ',' << format_double(row.std_error) << ','
        << row.n_samples << ',' << format_double(row.s) << ',' << format_double(row.p) << ','
        << row.seed << '\n';
  }
  return out.str();
}

std::vector<std::string> emit_report(const ScalingResult& r, const std::string& path,
                                     OutputFormat format) {
  std::vector<std::string> written;
  if (format == OutputFormat::Csv) {
    write_file(path, render_csv(r));
    written.push_back(path);
    nlohmann::json meta = to_json(r);
    meta.erase("rows");
    write_file(path + ".meta.json", meta.dump(2) + "\n");
    written.push_back(path + ".meta.json");
  } else {
    write_file(path, to_json(r).dump(2) + "\n");
    written.push_back(path);
  }
  std::ostringstream loglog;
  loglog << "# config_hash " << config_hash(r.config) << "\n# log_d log_energy\n";
  for (const auto& row : r.rows) {
    if (row.d == 0 || !(row.energy > 0.0)) continue;
    loglog << format_double(std::log(static_cast<double>(std::abs(row.d)))) << ' '
           << format_double(std::log(row.energy)) << '\n';
  }
  write_file(path + ".loglog.dat", loglog.str());
  written.push_back(path + ".loglog.dat");
  return written;
}

}  // namespace hopflab
