// hopflab: command-line front end.
//
//   hopflab verify   [--checks a,b] [--samples N] [--seed N] [--json]
//   hopflab energy   --descriptor FILE --s V [--p V] --samples N --seed N
//   hopflab hopf     --descriptor FILE [--seed N] [--curves PREFIX]
//   hopflab scaling  --s V --degrees LIST|kmax:N --samples N --seed N --out PATH --format csv|json
//   hopflab construct --degree D [--out FILE]
//
// Exit codes: 0 success, 1 failed check or run, 2 usage error. HOPFLAB_CONFIG
// names a JSON config file ({"verify": {...}, "scaling": {...}}); --config
// overrides it and explicit flags override both.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hopflab/constructions.hpp"
#include "hopflab/energy.hpp"
#include "hopflab/errors.hpp"
#include "hopflab/experiments.hpp"
#include "hopflab/topology.hpp"
#include "hopflab/verify.hpp"

using namespace hopflab;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

// Input problems that the user can fix by changing arguments.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

nlohmann::json load_config(const std::string& flag_path) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv("HOPFLAB_CONFIG")) path = env;
  }
  if (path.empty()) return nlohmann::json::object();
  return read_json_file(path);
}

nlohmann::json section(const nlohmann::json& config, const char* name) {
  if (config.contains(name)) return config.at(name);
  return nlohmann::json::object();
}

void write_or_print(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sphere maps of prescribed Hopf degree: construction, energies, invariants"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (overrides HOPFLAB_CONFIG)");

  // verify
  auto* verify = app.add_subcommand("verify", "Run the verification suite");
  std::string checks;
  std::int64_t v_samples = 0;
  std::uint64_t v_seed = 0;
  double v_degree_residual = 0.0;
  bool v_json = false;
  std::string v_report;
  bool v_list = false;
  auto* v_checks_opt = verify->add_option("--checks", checks, "Comma-separated check ids (\"\" for none)");
  auto* v_samples_opt = verify->add_option("--samples", v_samples, "Samples per energy estimate");
  auto* v_seed_opt = verify->add_option("--seed", v_seed, "Seed");
  auto* v_res_opt = verify->add_option("--degree-residual", v_degree_residual, "Degree residual bound");
  verify->add_flag("--json", v_json, "Print the JSON report instead of the table");
  verify->add_option("--report", v_report, "Also write the JSON report to this file");
  verify->add_flag("--list", v_list, "List check ids and exit");

  // energy
  auto* energy = app.add_subcommand("energy", "Estimate E_{s,p}(u, S^n) for a descriptor");
  std::string e_descriptor;
  double e_s = 0.5;
  double e_p = 0.0;
  std::int64_t e_samples = 1'000'000;
  std::uint64_t e_seed = 0;
  std::string e_out;
  energy->add_option("--descriptor", e_descriptor, "Map descriptor (JSON file)")->required();
  energy->add_option("--s", e_s, "Smoothness s in (0, 1)")->required();
  auto* e_p_opt = energy->add_option("--p", e_p, "Exponent p (default n / s)");
  energy->add_option("--samples", e_samples, "Sample pairs")->capture_default_str();
  energy->add_option("--seed", e_seed, "Seed")->capture_default_str();
  energy->add_option("--out", e_out, "Write the JSON record here instead of stdout");

  // hopf
  auto* hopf = app.add_subcommand("hopf", "Hopf invariant of an S^3 -> S^2 descriptor");
  std::string h_descriptor;
  std::uint64_t h_seed = 0;
  std::string h_curves;
  hopf->add_option("--descriptor", h_descriptor, "Map descriptor (JSON file)")->required();
  hopf->add_option("--seed", h_seed, "Seed for the regular values")->capture_default_str();
  hopf->add_option("--curves", h_curves, "Write traced fibers to PREFIX_<fiber>_<i>.{json,txt}");

  // scaling
  auto* scaling = app.add_subcommand("scaling", "Energy of prescribed_hopf_map(d) against d");
  double sc_s = 0.0;
  double sc_p = 0.0;
  std::string sc_degrees;
  std::int64_t sc_samples = 0;
  std::uint64_t sc_seed = 0;
  std::string sc_out;
  std::string sc_format;
  auto* sc_s_opt = scaling->add_option("--s", sc_s, "Smoothness s in (0, 1)");
  auto* sc_p_opt = scaling->add_option("--p", sc_p, "Exponent p (default 3 / s)");
  auto* sc_deg_opt = scaling->add_option("--degrees", sc_degrees, "List (1,4,9) or kmax:N");
  auto* sc_samples_opt = scaling->add_option("--samples", sc_samples, "Samples per estimate");
  auto* sc_seed_opt = scaling->add_option("--seed", sc_seed, "Seed");
  auto* sc_out_opt = scaling->add_option("--out", sc_out, "Output path");
  auto* sc_format_opt = scaling->add_option("--format", sc_format, "csv or json")
                            ->check(CLI::IsMember({"csv", "json"}));

  // construct
  auto* construct = app.add_subcommand("construct", "Descriptor of prescribed_hopf_map(d)");
  std::int64_t c_degree = 0;
  std::string c_out;
  construct->add_option("--degree", c_degree, "Hopf degree d")->required();
  construct->add_option("--out", c_out, "Write the descriptor here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const nlohmann::json config = load_config(config_path);

    if (*verify) {
      if (v_list) {
        for (const auto& id : verify_check_ids()) std::cout << id << '\n';
        return kOk;
      }
      VerifyConfig vc = verify_config_from_json(section(config, "verify"));
      if (*v_checks_opt) vc.checks = split_list(checks);
      if (*v_samples_opt) vc.samples = v_samples;
      if (*v_seed_opt) vc.seed = v_seed;
      if (*v_res_opt) vc.degree_residual = v_degree_residual;
      const VerifyReport report = run_verify(vc);
      const nlohmann::json j = to_json(report);
      if (v_json) {
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << render_table(report);
        std::cout << (report.all_passed() ? "all checks passed" : "some checks FAILED") << '\n';
      }
      if (!v_report.empty()) write_or_print(j.dump(2) + "\n", v_report);
      return report.all_passed() ? kOk : kFailed;
    }

    if (*energy) {
      const SphereMap u = from_descriptor(read_json_file(e_descriptor));
      const int n = u.domain_dim();
      EnergyParams params = *e_p_opt ? EnergyParams{.s = e_s, .p = e_p, .n = n, .critical = false}
                                     : EnergyParams::critical_for(e_s, n);
      McOptions o;
      o.samples = e_samples;
      o.seed = e_seed;
      const EnergyEstimate est = energy_mc(u, params, Region::whole(n), o);
      write_or_print(to_json(est).dump(2) + "\n", e_out);
      return kOk;
    }

    if (*hopf) {
      const Descriptor desc = read_json_file(h_descriptor);
      const SphereMap u = from_descriptor(desc);
      HopfOptions o;
      o.seed = h_seed;
      const HopfResult r = hopf_invariant_detailed(u, o);
      nlohmann::json out = {{"linking", to_json(r.report)},
                            {"targets", {point_to_json(r.target1), point_to_json(r.target2)}},
                            {"components", {r.fiber1.size(), r.fiber2.size()}},
                            {"attempts", r.attempts}};
      try {
        out["bookkeeping"] = to_json(bookkept_degree(desc));
      } catch (const DescriptorError&) {
        out["bookkeeping"] = nullptr;
      }
      if (!h_curves.empty()) {
        auto dump = [&h_curves](const std::vector<ClosedCurve>& fiber, int which) {
          for (std::size_t i = 0; i < fiber.size(); ++i) {
            const std::string base = h_curves + "_" + std::to_string(which) + "_" + std::to_string(i);
            write_or_print(to_json(fiber[i]).dump() + "\n", base + ".json");
            std::ofstream txt(base + ".txt");
            if (!txt) throw IoError("cannot open " + base + ".txt for writing");
            write_plain_text(fiber[i], txt);
          }
        };
        dump(r.fiber1, 1);
        dump(r.fiber2, 2);
      }
      std::cout << out.dump(2) << '\n';
      return kOk;
    }

    if (*scaling) {
      ExperimentConfig ec = config_from_json(section(config, "scaling"));
      if (*sc_s_opt) ec.s = sc_s;
      if (*sc_p_opt) ec.p = sc_p;
      if (*sc_s_opt && !*sc_p_opt) ec.p.reset();
      if (*sc_deg_opt) ec.degrees = parse_degrees(sc_degrees);
      if (*sc_samples_opt) ec.samples_per_estimate = sc_samples;
      if (*sc_seed_opt) ec.seed = sc_seed;
      if (*sc_out_opt) ec.output_path = sc_out;
      if (*sc_format_opt) ec.format = parse_format(sc_format);
      if (ec.output_path.empty()) throw UsageError("scaling: --out is required");
      ec.validate();
      const ScalingResult r = run_scaling(ec);
      for (const auto& path : emit_report(r, ec.output_path, ec.format)) std::cerr << "wrote " << path << '\n';
      std::cout << render_csv(r);
      if (r.slope) {
        std::cout << "slope " << *r.slope;
        if (r.slope_stderr) std::cout << " +- " << *r.slope_stderr;
        std::cout << '\n';
      } else {
        std::cout << "slope undefined (fewer than two rows with |d| >= 2)\n";
      }
      if (r.partial) {
        std::cerr << "run aborted: " << r.error << '\n';
        return kFailed;
      }
      return kOk;
    }

    if (*construct) {
      const SphereMap u = prescribed_hopf_map(c_degree);
      write_or_print(u.descriptor().dump(2) + "\n", c_out);
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DescriptorError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kOk;
}
