#pragma once

// Runtime checks of the energy inequalities behind the construction: gluing
// through an annulus, patching of disjointly supported maps, and the
// comparison between v ∘ h on S^3 and v on S^2.

#include <optional>
#include <vector>

#include "json.hpp"

#include "hopflab/energy.hpp"
#include "hopflab/sphere_map.hpp"

namespace hopflab {

inline constexpr double kMaxGluingConstant = 1e6;

struct GluingReport {
  double eta = 0.0;
  double rho = 0.0;
  EnergyEstimate lhs;    // E(u, A)
  EnergyEstimate ball;   // E(u, B(rho))
  EnergyEstimate outer;  // E(u, A \ B(eta rho))
  double a = 0.0;        // 1 / (1 - eta)^{sp+1}
  double b = 0.0;        // eta^n / (1 - eta)
  // Smallest C >= 0 with lhs <= (1 + C a) ball + (1 + C b) outer, point
  // estimate and delta-method standard error. Infinite if no C works.
  double constant = 0.0;
  double constant_std_error = 0.0;
  bool finite = true;  // constant <= kMaxGluingConstant
  bool holds = true;   // no violation beyond 3 SE at C = kMaxGluingConstant
};

// A must be the whole sphere or a ball containing B(center, rho).
GluingReport check_gluing_bound(const SphereMap& u, const Region& a, const SpherePoint& center,
                                double eta, double rho, const EnergyParams& params,
                                const McOptions& options);

struct PatchingReport {
  EnergyEstimate patched;
  std::vector<EnergyEstimate> pieces;
  double lhs = 0.0;
  double rhs = 0.0;    // 2^p sum of piece energies
  double ratio = 0.0;  // lhs / sum, finite only when the sum is positive
  double slack = 0.0;  // 3 combined SE
  bool holds = true;
};

PatchingReport check_patching_bound(const std::vector<SphereMap>& pieces, const SphereMap& patched,
                                    const EnergyParams& params, const McOptions& options);

// The pieces a patched map was assembled from, read off its descriptor: the
// background (if any) followed by each piece. A map that is not a patch is
// its own single piece.
std::vector<SphereMap> patch_pieces(const SphereMap& u);

struct FiberComparison {
  EnergyEstimate total;  // E(v ∘ h, S^3), n = 3, p = 3/s
  EnergyEstimate base;   // E(v, S^2), n = 2, same s and p
  std::optional<double> ratio;  // absent when base energy vanishes
  double ratio_std_error = 0.0;
};

FiberComparison fiber_energy_comparison(const SphereMap& v, double s, const McOptions& options);

nlohmann::json to_json(const GluingReport& r);
nlohmann::json to_json(const PatchingReport& r);
nlohmann::json to_json(const FiberComparison& r);

}  // namespace hopflab
