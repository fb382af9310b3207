#pragma once

// Integer invariants of sphere maps: the mapping degree of S^m -> S^m by
// integrating the Jacobian determinant, and the Hopf invariant of
// S^3 -> S^2 as the linking number of two regular fibers.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hopflab/execution.hpp"
#include "hopflab/sphere.hpp"
#include "hopflab/sphere_map.hpp"

namespace hopflab {

enum class DegreeMethod { JacobianIntegral, Linking, Bookkeeping };

std::string to_string(DegreeMethod m);

struct DegreeReport {
  std::int64_t value = 0;
  double raw = 0.0;
  double residual = 0.0;  // |raw - value|
  DegreeMethod method = DegreeMethod::Bookkeeping;

  static DegreeReport from_raw(double raw, DegreeMethod method);
};

nlohmann::json to_json(const DegreeReport& r);

// Closed polyline on S^3; the segment from the last point back to the first
// is implicit.
struct ClosedCurve {
  std::vector<Vec> points;
  double tolerance = 0.0;  // bound on every gap, including last -> first

  double max_gap() const;
  double length() const;
};

nlohmann::json to_json(const ClosedCurve& c);
ClosedCurve curve_from_json(const nlohmann::json& j);
// One point per line, coordinates separated by spaces.
void write_plain_text(const ClosedCurve& c, std::ostream& out);

inline constexpr std::int64_t kMinDegreeGrid = 1000;

// Mean of det(Df) in positively oriented tangent frames over a spiral grid.
// When f declares ball support the integral runs over the balls only, in
// geodesic polar coordinates with Gauss-Legendre radial nodes, since det(Df)
// vanishes where f is constant. Throws UnresolvedDegreeError if the
// residual reaches 0.5.
DegreeReport mapping_degree(const SphereMap& f, std::int64_t grid_size,
                            Execution execution = Execution::Parallel);

struct TraceOptions {
  double step = 1e-3;
  double corrector_tolerance = 1e-10;
  double min_singular_value = 1e-3;
  std::int64_t max_points = 2'000'000;
};

// Follows f^{-1}(target) from each seed: predictor along the oriented kernel
// of Df, Gauss-Newton corrector back onto the fiber. Seeds that do not
// converge are skipped; seeds near an already traced component are
// deduplicated. Raises NonRegularValueError if Df loses rank along a fiber
// or a curve fails to close.
std::vector<ClosedCurve> trace_fiber(const SphereMap& f, const SpherePoint& target,
                                     const std::vector<Vec>& seeds,
                                     const TraceOptions& options = {});

// Points of a spiral grid on S^3 whose image lies within `radius` (chordal)
// of target, closest first.
std::vector<Vec> fiber_seeds(const SphereMap& f, const SpherePoint& target,
                             std::int64_t grid_size = 32768, double radius = 0.3);

// Discrete Gauss integral after stereographic projection from a point far
// from both curves. Exactly symmetric in its arguments. Raises
// IllConditionedLinkingError when the curves come closer than five times
// the larger tolerance.
DegreeReport gauss_linking(const ClosedCurve& c1, const ClosedCurve& c2,
                           Execution execution = Execution::Parallel);

struct HopfOptions {
  std::uint64_t seed = 0;
  TraceOptions trace;
  std::int64_t seed_grid = 32768;
  int retries = 20;
  Execution execution = Execution::Parallel;
};

struct HopfResult {
  DegreeReport report;
  SpherePoint target1 = SpherePoint::basis(2, 0);
  SpherePoint target2 = SpherePoint::basis(2, 0);
  std::vector<ClosedCurve> fiber1;
  std::vector<ClosedCurve> fiber2;
  int attempts = 0;
};

// Sum of gauss_linking over component pairs of the fibers over two random
// regular values.
HopfResult hopf_invariant_detailed(const SphereMap& f, const HopfOptions& options = {});
DegreeReport hopf_invariant(const SphereMap& f, const HopfOptions& options = {});

// Degree (or Hopf degree for S^3 -> S^2) read off a descriptor by structural
// recursion.
DegreeReport bookkept_degree(const Descriptor& descriptor);

}  // namespace hopflab
