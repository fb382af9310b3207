#pragma once

// Fractional Sobolev energy
//   E_{s,p}(u, Ω) = ∫_Ω ∫_Ω |u(x) - u(y)|^p / |x - y|^{n + sp} dx dy
// on S^n with chordal |x - y|.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hopflab/execution.hpp"
#include "hopflab/sphere.hpp"
#include "hopflab/sphere_map.hpp"

namespace hopflab {

struct EnergyParams {
  double s = 0.5;
  double p = 6.0;
  int n = 3;
  // When set, s * p must equal n.
  bool critical = false;

  static EnergyParams critical_for(double s, int n) {
    return {.s = s, .p = static_cast<double>(n) / s, .n = n, .critical = true};
  }

  double kernel_exponent() const { return n + s * p; }
  void validate() const;
};

class Region {
 public:
  enum class Kind { Whole, Ball, Complement, Difference };

  static Region whole(int n);
  static Region ball(const GeodesicBall& ball);
  static Region complement(const GeodesicBall& ball);
  // outer minus inner; inner must lie inside outer or be disjoint from it.
  static Region difference(const GeodesicBall& outer, const GeodesicBall& inner);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double measure() const { return measure_; }
  bool contains(const Vec& x) const;
  Vec sample(Rng& rng) const;
  const std::optional<GeodesicBall>& outer() const { return outer_; }
  const std::optional<GeodesicBall>& inner() const { return inner_; }

  nlohmann::json to_json() const;
  static Region from_json(const nlohmann::json& j);

 private:
  Region(Kind kind, int dim, std::optional<GeodesicBall> outer, std::optional<GeodesicBall> inner);

  Kind kind_;
  int dim_;
  std::optional<GeodesicBall> outer_;  // Ball, Difference
  std::optional<GeodesicBall> inner_;  // Complement, Difference
  double measure_ = 0.0;
};

// One dyadic geodesic shell [inner_radius, outer_radius] around x.
struct StratumRecord {
  int index = 0;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  double shell_measure = 0.0;
  std::int64_t samples = 0;
  double contribution = 0.0;  // estimated share of the energy
  double variance = 0.0;      // variance of that estimate
};

struct EnergyEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  EnergyParams params;
  Region region = Region::whole(3);
  std::uint64_t seed = 0;
  std::vector<StratumRecord> strata;
  // The ball of radius pi 2^{-J} around the diagonal is not sampled; its
  // contribution lies in [0, remainder_bound] (absent without a Lipschitz hint).
  std::optional<double> remainder_bound;
  // "region": x uniform in Ω. "support": x uniform in the map's declared
  // support balls, pairs weighted by 2 - 1_S(y).
  std::string sampling = "region";
};

nlohmann::json to_json(const EnergyEstimate& e);

struct McOptions {
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int strata = 20;
  std::int64_t batch_size = 4096;
  Execution execution = Execution::Parallel;
};

inline constexpr std::int64_t kMinMcSamples = 1000;

// |u(x) - u(y)|^p / |x - y|^{n+sp}; symmetric in (x, y) bit for bit.
double pair_kernel(const Vec& ux, const Vec& uy, const Vec& x, const Vec& y,
                   const EnergyParams& params);

// Stratified Monte Carlo: x uniform, y uniform in dyadic geodesic shells
// [pi 2^{-j-1}, pi 2^{-j}], j = 0..J-1, around x with exact shell measures.
// Bit-identical for a given (seed, samples, strata, batch_size) under both
// execution modes.
EnergyEstimate energy_mc(const SphereMap& u, const EnergyParams& params, const Region& region,
                         const McOptions& options);

struct QuadratureOptions {
  int resolution = 2;
  int radial_intervals = 24;
  std::int64_t pair_budget = 1'000'000'000;
  Execution execution = Execution::Parallel;
};

// Number of integrand evaluations energy_quadrature performs.
std::int64_t quadrature_pairs(int n, const QuadratureOptions& options);

// Deterministic product rule over the whole sphere: spiral grid of outer
// points; geodesic polar coordinates around each with Gauss-Legendre nodes on
// dyadic radial intervals accumulating at the diagonal.
double energy_quadrature(const SphereMap& u, const EnergyParams& params,
                         const QuadratureOptions& options);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace hopflab
