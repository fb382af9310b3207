#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "hopflab/constructions.hpp"
#include "hopflab/energy.hpp"
#include "hopflab/errors.hpp"
#include "hopflab/inequalities.hpp"
#include "hopflab/random.hpp"
#include "hopflab/topology.hpp"
#include "hopflab/verify.hpp"

namespace hopflab {

namespace {

struct Outcome {
  bool passed = false;
  nlohmann::json measured;
  std::string detail;
};

using CheckFn = std::function<Outcome(const VerifyConfig&)>;

struct Check {
  std::string id;
  std::string description;
  CheckFn run;
};

McOptions mc(const VerifyConfig& c, std::uint64_t salt) {
  McOptions o;
  o.samples = c.samples;
  o.seed = mix_seed(c.seed, salt);
  o.execution = c.execution;
  return o;
}

bool degree_ok(const DegreeReport& r, std::int64_t expected, const VerifyConfig& c) {
  return r.value == expected && r.residual < c.degree_residual;
}

Outcome hopf_gradient(const VerifyConfig& c) {
  const SphereMap h = hopf_map();
  Rng rng = make_stream(c.seed, 1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec x = sample_uniform(3, rng).coords();
    const double g = (h.jacobian(x) * tangent_frame(x)).squaredNorm();
    worst = std::max(worst, std::abs(g - 8.0));
  }
  Outcome o;
  o.passed = h.has_analytic_jacobian() && worst < c.gradient_tolerance;
  o.measured = {{"points", 1000}, {"max_deviation", worst}};
  if (!o.passed) o.detail = "|grad h|^2 deviates from 8";
  return o;
}

Outcome degree(const VerifyConfig& c) {
  Rng rng = make_stream(c.seed, 2);
  Outcome o;
  o.passed = true;
  double worst = 0.0;
  nlohmann::json cases = nlohmann::json::array();
  auto record = [&](const std::string& name, const DegreeReport& r, std::int64_t expected) {
    worst = std::max(worst, r.residual);
    cases.push_back({{"map", name}, {"value", r.value}, {"expected", expected}, {"residual", r.residual}});
    if (!degree_ok(r, expected, c)) {
      o.passed = false;
      if (o.detail.empty()) o.detail = name + " failed";
    }
  };
  for (int m : {2, 3}) {
    for (double r : {0.1, 0.3, 0.7}) {
      const SpherePoint x0 = sample_uniform(m, rng);
      const SpherePoint b = sample_uniform(m, rng);
      std::ostringstream name;
      name << "bump_deg1(S^" << m << ", r=" << r << ")";
      record(name.str(), mapping_degree(bump_deg1(x0, r, b), c.degree_grid, c.execution), 1);
    }
  }
  const SpherePoint b = SpherePoint::basis(2, 0);
  for (int k = 1; k <= 9; ++k) {
    record("multi_bubble(" + std::to_string(k) + ")",
           mapping_degree(multi_bubble(k, b), c.degree_grid, c.execution), k);
  }
  o.measured = {{"max_residual", worst}, {"cases", cases}};
  return o;
}

HopfOptions hopf_options(const VerifyConfig& c, std::uint64_t salt) {
  HopfOptions h;
  h.seed = mix_seed(c.seed, salt);
  h.execution = c.execution;
  return h;
}

Outcome hopf_invariant_check(const VerifyConfig& c) {
  const DegreeReport r = hopf_invariant(hopf_map(), hopf_options(c, 3));
  Outcome o;
  o.passed = degree_ok(r, 1, c);
  o.measured = to_json(r);
  if (!o.passed) o.detail = "linking of two Hopf fibers is not 1 within tolerance";
  return o;
}

Outcome bookkeeping(const VerifyConfig& c) {
  Outcome o;
  const DegreeReport linked = hopf_invariant(prescribed_hopf_map(1), hopf_options(c, 4));
  o.passed = degree_ok(linked, 1, c);
  if (!o.passed) o.detail = "prescribed_hopf_map(1) does not link once";
  nlohmann::json audit = nlohmann::json::object();
  for (std::int64_t d : {0, 1, 2, 5, 7, 9, -3}) {
    const DegreeReport r = bookkept_degree(prescribed_hopf_map(d).descriptor());
    audit[std::to_string(d)] = r.value;
    if (r.value != d) {
      o.passed = false;
      o.detail = "bookkept degree of prescribed_hopf_map(" + std::to_string(d) + ") is " +
                 std::to_string(r.value);
    }
  }
  o.measured = {{"linking", to_json(linked)}, {"bookkept", audit}};
  return o;
}

Outcome patching(const VerifyConfig& c) {
  const SphereMap u = prescribed_hopf_map(7);
  const PatchingReport r =
      check_patching_bound(patch_pieces(u), u, EnergyParams::critical_for(0.5, 3), mc(c, 5));
  Outcome o;
  o.passed = r.holds;
  o.measured = {{"pieces", r.pieces.size()}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}, {"slack", r.slack}};
  if (!o.passed) o.detail = "patched energy exceeds 2^p times the piece energies";
  return o;
}

Outcome gluing(const VerifyConfig& c) {
  Rng rng = make_stream(c.seed, 6);
  const SpherePoint x0 = sample_uniform(3, rng);
  constexpr double r = 0.3;
  const SphereMap u = hopf_bump(x0, r, SpherePoint::basis(2, 0));
  const GluingReport g = check_gluing_bound(u, Region::whole(3), x0, 0.5, bump_support_radius(r),
                                            EnergyParams::critical_for(0.5, 3), mc(c, 6));
  Outcome o;
  o.passed = g.finite && g.holds;
  o.measured = {{"lhs", g.lhs.value},
                {"ball", g.ball.value},
                {"outer", g.outer.value},
                {"constant", g.constant},
                {"constant_std_error", g.constant_std_error}};
  if (!o.passed) o.detail = "no admissible gluing constant";
  return o;
}

Outcome bump_r_independence(const VerifyConfig& c) {
  Rng rng = make_stream(c.seed, 7);
  const SpherePoint x0 = sample_uniform(3, rng);
  const SpherePoint b = SpherePoint::basis(2, 0);
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  const EnergyEstimate e1 = energy_mc(hopf_bump(x0, 0.1, b), params, Region::whole(3), mc(c, 71));
  const EnergyEstimate e3 = energy_mc(hopf_bump(x0, 0.3, b), params, Region::whole(3), mc(c, 73));
  const double gap = std::abs(e1.value - e3.value);
  const double se = std::hypot(e1.std_error, e3.std_error);
  Outcome o;
  o.passed = gap <= c.se_factor * se;
  o.measured = {{"r0.1", e1.value}, {"r0.3", e3.value}, {"gap", gap}, {"combined_se", se}};
  if (!o.passed) o.detail = "bump energies differ beyond the standard-error band";
  return o;
}

Outcome fiber_comparison(const VerifyConfig& c) {
  const SpherePoint b = SpherePoint::basis(2, 0);
  std::vector<double> ratios;
  for (int k = 1; k <= 4; ++k) {
    const FiberComparison f = fiber_energy_comparison(multi_bubble(k, b), 0.5, mc(c, 80 + k));
    if (!f.ratio) throw Error("fiber comparison undefined for k = " + std::to_string(k));
    ratios.push_back(*f.ratio);
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[1] + sorted[2]);
  Outcome o;
  o.passed = sorted.front() >= median / c.ratio_factor && sorted.back() <= median * c.ratio_factor;
  o.measured = {{"ratios", ratios}, {"median", median}};
  if (!o.passed) o.detail = "ratios spread beyond the allowed factor";
  return o;
}

Outcome estimator(const VerifyConfig& c) {
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  Outcome o;
  o.passed = true;
  nlohmann::json oracle = nlohmann::json::array();
  const std::vector<std::pair<std::string, SphereMap>> maps = {
      {"hopf_map", hopf_map()},
      {"multi_bubble(2) o h", composed_with_hopf(multi_bubble(2, SpherePoint::basis(2, 0)))}};
  std::uint64_t salt = 90;
  for (const auto& [name, u] : maps) {
    const EnergyEstimate e = energy_mc(u, params, Region::whole(3), mc(c, salt++));
    QuadratureOptions q;
    q.resolution = c.quadrature_resolution;
    q.execution = c.execution;
    const double fine = energy_quadrature(u, params, q);
    q.resolution = std::max(1, c.quadrature_resolution / 2);
    const double coarse = energy_quadrature(u, params, q);
    const double gap = std::abs(e.value - fine);
    const double allowed = c.se_factor * (e.std_error + std::abs(fine - coarse));
    oracle.push_back({{"map", name},
                      {"mc", e.value},
                      {"std_error", e.std_error},
                      {"quadrature", fine},
                      {"self_convergence", std::abs(fine - coarse)},
                      {"gap", gap}});
    if (gap > allowed) {
      o.passed = false;
      o.detail = name + ": Monte Carlo and quadrature disagree";
    }
  }
  const std::int64_t n0 = std::max<std::int64_t>(kMinMcSamples, c.samples / 8);
  std::vector<double> se;
  const SphereMap h = hopf_map();
  for (int i = 0; i <= 3; ++i) {
    McOptions opt = mc(c, 99);
    opt.samples = n0 << i;
    se.push_back(energy_mc(h, params, Region::whole(3), opt).std_error);
  }
  const double reduction = se.front() / se.back();
  const double expected = std::sqrt(8.0);
  const bool scaling_ok = std::abs(reduction / expected - 1.0) <= c.se_scaling_tolerance;
  if (!scaling_ok) {
    o.passed = false;
    o.detail = "standard error does not scale like n^(-1/2)";
  }
  o.measured = {{"oracle", oracle}, {"se", se}, {"se_reduction", reduction}, {"expected", expected}};
  return o;
}

const std::vector<Check>& registry() {
  static const std::vector<Check> checks = {
      {"hopf_gradient", "|grad h|^2 = 8 at 1000 uniform points", hopf_gradient},
      {"degree", "mapping degree of bumps and multi-bubbles", degree},
      {"hopf_invariant", "Hopf invariant of h by fiber linking", hopf_invariant_check},
      {"bookkeeping", "linking and structural degrees of prescribed maps", bookkeeping},
      {"patching", "patching inequality for prescribed_hopf_map(7)", patching},
      {"gluing", "gluing inequality for a Hopf bump, eta = 1/2", gluing},
      {"bump_r_independence", "Hopf bump energy at r = 0.1 and r = 0.3", bump_r_independence},
      {"fiber_comparison", "E(v_k o h) / E(v_k) bounded for k = 1..4", fiber_comparison},
      {"estimator", "Monte Carlo vs quadrature and n^(-1/2) error decay", estimator},
  };
  return checks;
}

}  // namespace

void VerifyConfig::validate() const {
  if (samples < kMinMcSamples) throw ParameterError("verify: samples must be at least 1000");
  if (degree_grid < kMinDegreeGrid) throw ParameterError("verify: degree_grid must be at least 1000");
  if (quadrature_resolution < 1) throw ParameterError("verify: quadrature_resolution must be positive");
}

nlohmann::json to_json(const VerifyConfig& c) {
  nlohmann::json j = {{"seed", c.seed},
                      {"samples", c.samples},
                      {"gradient_tolerance", c.gradient_tolerance},
                      {"degree_residual", c.degree_residual},
                      {"se_factor", c.se_factor},
                      {"ratio_factor", c.ratio_factor},
                      {"se_scaling_tolerance", c.se_scaling_tolerance},
                      {"degree_grid", c.degree_grid},
                      {"quadrature_resolution", c.quadrature_resolution}};
  j["checks"] = c.checks ? nlohmann::json(*c.checks) : nlohmann::json();
  return j;
}

VerifyConfig verify_config_from_json(const nlohmann::json& j) {
  VerifyConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.samples = j.value("samples", c.samples);
    c.gradient_tolerance = j.value("gradient_tolerance", c.gradient_tolerance);
    c.degree_residual = j.value("degree_residual", c.degree_residual);
    c.se_factor = j.value("se_factor", c.se_factor);
    c.ratio_factor = j.value("ratio_factor", c.ratio_factor);
    c.se_scaling_tolerance = j.value("se_scaling_tolerance", c.se_scaling_tolerance);
    c.degree_grid = j.value("degree_grid", c.degree_grid);
    c.quadrature_resolution = j.value("quadrature_resolution", c.quadrature_resolution);
    if (j.contains("checks") && !j.at("checks").is_null()) {
      c.checks = j.at("checks").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("verify config: ") + e.what());
  }
  return c;
}

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const std::vector<std::string>& verify_check_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& c : registry()) out.push_back(c.id);
    return out;
  }();
  return ids;
}

VerifyReport run_verify(const VerifyConfig& config) {
  config.validate();
  std::vector<const Check*> selected;
  if (config.checks) {
    for (const auto& id : *config.checks) {
      const auto it = std::find_if(registry().begin(), registry().end(),
                                   [&id](const Check& c) { return c.id == id; });
      if (it == registry().end()) throw ParameterError("unknown check \"" + id + "\"");
      selected.push_back(&*it);
    }
  } else {
    for (const auto& c : registry()) selected.push_back(&c);
  }

  VerifyReport report;
  for (const Check* check : selected) {
    CheckResult r;
    r.id = check->id;
    r.description = check->description;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Outcome o = check->run(config);
      r.passed = o.passed;
      r.measured = std::move(o.measured);
      r.detail = std::move(o.detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.checks.push_back(std::move(r));
  }
  return report;
}

nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"id", c.id},
                      {"description", c.description},
                      {"passed", c.passed},
                      {"measured", c.measured},
                      {"detail", c.detail},
                      {"seconds", c.seconds}});
  }
  return {{"all_passed", r.all_passed()}, {"checks", checks}};
}

std::string render_table(const VerifyReport& r) {
  std::ostringstream out;
  for (const auto& c : r.checks) {
    out << std::left << std::setw(22) << c.id << (c.passed ? "PASS" : "FAIL") << "  "
        << std::right << std::fixed << std::setprecision(1) << std::setw(6) << c.seconds << "s  " << std::left << c.description;
    if (!c.passed && !c.detail.empty()) out << "  [" << c.detail << "]";
    out << '\n';
  }
  return out.str();
}

}  // namespace hopflab
