#include <cmath>
#include <limits>
#include <numbers>

#include "hopflab/constructions.hpp"
#include "hopflab/errors.hpp"
#include "hopflab/inequalities.hpp"
#include "hopflab/random.hpp"

namespace hopflab {

namespace {

McOptions salted(const McOptions& options, std::uint64_t salt) {
  McOptions o = options;
  o.seed = mix_seed(options.seed, salt);
  return o;
}

double sq(double v) { return v * v; }

}  // namespace

GluingReport check_gluing_bound(const SphereMap& u, const Region& a, const SpherePoint& center,
                                double eta, double rho, const EnergyParams& params,
                                const McOptions& options) {
  if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("check_gluing_bound: eta must lie in (0, 1)");
  if (!(rho > 0.0 && rho < std::numbers::pi)) {
    throw ParameterError("check_gluing_bound: rho must lie in (0, pi)");
  }
  if (center.dim() != a.dim()) throw DimensionError("check_gluing_bound: center dimension");
  const GeodesicBall big(center, rho);
  const GeodesicBall small(center, eta * rho);

  std::optional<Region> rest;
  switch (a.kind()) {
    case Region::Kind::Whole:
      rest = Region::complement(small);
      break;
    case Region::Kind::Ball: {
      const GeodesicBall& outer = *a.outer();
      if (geodesic_distance(outer.center(), center) + rho > outer.radius()) {
        throw RegionError("check_gluing_bound: B(rho) is not inside A");
      }
      rest = Region::difference(outer, small);
      break;
    }
    default:
      throw RegionError("check_gluing_bound: A must be the whole sphere or a ball");
  }

  GluingReport r;
  r.eta = eta;
  r.rho = rho;
  r.lhs = energy_mc(u, params, a, salted(options, 1));
  r.ball = energy_mc(u, params, Region::ball(big), salted(options, 2));
  r.outer = energy_mc(u, params, *rest, salted(options, 3));
  r.a = 1.0 / std::pow(1.0 - eta, params.s * params.p + 1.0);
  r.b = std::pow(eta, params.n) / (1.0 - eta);

  const double num = r.lhs.value - r.ball.value - r.outer.value;
  const double den = r.a * r.ball.value + r.b * r.outer.value;
  const double var_num = sq(r.lhs.std_error) + sq(r.ball.std_error) + sq(r.outer.std_error);
  const double var_den = sq(r.a * r.ball.std_error) + sq(r.b * r.outer.std_error);
  if (num <= 0.0) {
    r.constant = 0.0;
    r.constant_std_error = den > 0.0 ? std::sqrt(var_num) / den : 0.0;
  } else if (den > 0.0) {
    r.constant = num / den;
    r.constant_std_error = std::sqrt(var_num / sq(den) + sq(num) * var_den / sq(sq(den)));
  } else {
    r.constant = std::numeric_limits<double>::infinity();
    r.constant_std_error = 0.0;
  }
  r.finite = r.constant <= kMaxGluingConstant;

  const double ca = 1.0 + kMaxGluingConstant * r.a;
  const double cb = 1.0 + kMaxGluingConstant * r.b;
  const double excess = r.lhs.value - ca * r.ball.value - cb * r.outer.value;
  const double se = std::sqrt(sq(r.lhs.std_error) + sq(ca * r.ball.std_error) + sq(cb * r.outer.std_error));
  r.holds = excess <= 3.0 * se;
  return r;
}

PatchingReport check_patching_bound(const std::vector<SphereMap>& pieces, const SphereMap& patched,
                                    const EnergyParams& params, const McOptions& options) {
  PatchingReport r;
  const Region whole = Region::whole(params.n);
  r.patched = energy_mc(patched, params, whole, salted(options, 0));
  double sum = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    r.pieces.push_back(energy_mc(pieces[i], params, whole, salted(options, i + 1)));
    sum += r.pieces.back().value;
    var += sq(r.pieces.back().std_error);
  }
  const double factor = std::pow(2.0, params.p);
  r.lhs = r.patched.value;
  r.rhs = factor * sum;
  r.ratio = sum > 0.0 ? r.lhs / sum
                      : (r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  r.slack = 3.0 * std::sqrt(sq(r.patched.std_error) + sq(factor) * var);
  r.holds = r.lhs <= r.rhs + r.slack;
  return r;
}

std::vector<SphereMap> patch_pieces(const SphereMap& u) {
  const Descriptor* d = &u.descriptor();
  if (d->value("type", "") == "prescribed_hopf") d = &d->at("map");
  if (d->value("type", "") != "patch") return {u};
  std::vector<SphereMap> out;
  if (!d->at("background").is_null()) out.push_back(from_descriptor(d->at("background")));
  for (const auto& piece : d->at("pieces")) out.push_back(from_descriptor(piece.at("map")));
  return out;
}

FiberComparison fiber_energy_comparison(const SphereMap& v, double s, const McOptions& options) {
  if (v.domain_dim() != 2 || v.codomain_dim() != 2) {
    throw DimensionError("fiber_energy_comparison: v must map S^2 to S^2");
  }
  const EnergyParams top = EnergyParams::critical_for(s, 3);
  const EnergyParams bottom{.s = s, .p = top.p, .n = 2, .critical = false};
  FiberComparison r;
  r.total = energy_mc(composed_with_hopf(v), top, Region::whole(3), salted(options, 1));
  r.base = energy_mc(v, bottom, Region::whole(2), salted(options, 2));
  if (r.base.value > 0.0) {
    const double ratio = r.total.value / r.base.value;
    r.ratio = ratio;
    const double rel = r.total.value > 0.0 ? sq(r.total.std_error / r.total.value) : 0.0;
    r.ratio_std_error = ratio * std::sqrt(rel + sq(r.base.std_error / r.base.value));
  }
  return r;
}

nlohmann::json to_json(const GluingReport& r) {
  return {{"eta", r.eta},
          {"rho", r.rho},
          {"lhs", to_json(r.lhs)},
          {"ball", to_json(r.ball)},
          {"outer", to_json(r.outer)},
          {"a", r.a},
          {"b", r.b},
          {"constant", std::isfinite(r.constant) ? nlohmann::json(r.constant) : nlohmann::json("inf")},
          {"constant_std_error", r.constant_std_error},
          {"finite", r.finite},
          {"holds", r.holds}};
}

nlohmann::json to_json(const PatchingReport& r) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& e : r.pieces) pieces.push_back(to_json(e));
  return {{"patched", to_json(r.patched)},
          {"pieces", pieces},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"ratio", std::isfinite(r.ratio) ? nlohmann::json(r.ratio) : nlohmann::json("inf")},
          {"slack", r.slack},
          {"holds", r.holds}};
}

nlohmann::json to_json(const FiberComparison& r) {
  return {{"total", to_json(r.total)},
          {"base", to_json(r.base)},
          {"ratio", r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json()},
          {"ratio_std_error", r.ratio_std_error},
          {"undefined", !r.ratio.has_value()}};
}

}  // namespace hopflab
