#include <cmath>
#include <numbers>

#include "doctest.h"

#include "hopflab/constructions.hpp"
#include "hopflab/energy.hpp"
#include "hopflab/errors.hpp"
#include "hopflab/inequalities.hpp"

using namespace hopflab;

namespace {

constexpr double kPi = std::numbers::pi;

McOptions mc(std::int64_t samples, std::uint64_t seed, Execution ex = Execution::Parallel) {
  McOptions o;
  o.samples = samples;
  o.seed = seed;
  o.execution = ex;
  return o;
}

bool within(double a, double sa, double b, double sb, double k = 4.0) {
  return std::abs(a - b) <= k * std::hypot(sa, sb) + 1e-12 * std::abs(b);
}

// E(id, S^2) = 8 pi^2 2^{a+2} / (a+2) with a = p(1-s) - 2: the chord t of a
// uniform pair on S^2 has area element 2 pi t dt.
double identity_energy_s2(double s, double p) {
  const double a = p * (1.0 - s) - 2.0;
  return 8.0 * kPi * kPi * std::pow(2.0, a + 2.0) / (a + 2.0);
}

}  // namespace

TEST_CASE("parameters") {
  CHECK_NOTHROW(EnergyParams{}.validate());
  CHECK(EnergyParams::critical_for(0.5, 3).p == 6.0);
  CHECK_THROWS_AS((EnergyParams{.s = 1.0, .p = 3.0, .n = 3}.validate()), ParameterError);
  CHECK_THROWS_AS((EnergyParams{.s = 0.5, .p = 1.0, .n = 3}.validate()), ParameterError);
  CHECK_THROWS_AS((EnergyParams{.s = 0.5, .p = 4.0, .n = 3, .critical = true}.validate()), ParameterError);
  CHECK_THROWS_AS((EnergyParams{.s = 0.5, .p = 4.0, .n = 4}.validate()), DimensionError);
}

TEST_CASE("pair_kernel is symmetric bit for bit") {
  Rng rng = make_stream(1);
  const SphereMap h = hopf_map();
  for (const EnergyParams& params : {EnergyParams::critical_for(0.5, 3), EnergyParams::critical_for(0.8, 3)}) {
    for (int i = 0; i < 1000; ++i) {
      const Vec x = sample_uniform(3, rng).coords();
      const Vec y = sample_uniform(3, rng).coords();
      const Vec ux = h.eval(x), uy = h.eval(y);
      CHECK(pair_kernel(ux, uy, x, y, params) == pair_kernel(uy, ux, y, x, params));
      const double t = chordal_distance(x, y);
      const double want = std::pow((ux - uy).norm(), params.p) / std::pow(t, params.kernel_exponent());
      CHECK(pair_kernel(ux, uy, x, y, params) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("constant maps have zero energy") {
  const SphereMap c = constant_map(3, SpherePoint::basis(2, 0));
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  const EnergyEstimate e = energy_mc(c, params, Region::whole(3), mc(10000, 3));
  CHECK(e.value == 0.0);
  CHECK(e.std_error == 0.0);
  CHECK(energy_quadrature(c, params, {}) == 0.0);
}

TEST_CASE("identity energies match closed forms") {
  // With p(1 - s) = n the integrand is 1 and E = |S^n|^2.
  const double s3 = sphere_measure(3);
  const EnergyEstimate e3 = energy_mc(identity_map(3), EnergyParams::critical_for(0.5, 3), Region::whole(3), mc(200000, 4));
  CHECK(std::abs(e3.value - s3 * s3) < 4 * e3.std_error + 1e-9 * s3 * s3);
  CHECK(std::abs(e3.value - s3 * s3) / (s3 * s3) < 1e-3);

  for (const auto& [s, p] : {std::pair{0.5, 4.0}, std::pair{0.3, 3.0}, std::pair{0.7, 5.0}}) {
    const EnergyParams params{.s = s, .p = p, .n = 2};
    const double want = identity_energy_s2(s, p);
    const EnergyEstimate e = energy_mc(identity_map(2), params, Region::whole(2), mc(400000, 5));
    REQUIRE(e.remainder_bound);
    // The unsampled diagonal ball accounts for at most remainder_bound.
    CHECK(e.value <= want + 4 * e.std_error);
    CHECK(e.value + *e.remainder_bound >= want - 4 * e.std_error - 1e-12 * want);
    const double q = energy_quadrature(identity_map(2), params, {.resolution = 4});
    CHECK(std::abs(q - want) / want < 1e-2);
  }
  CHECK(identity_energy_s2(0.5, 4.0) == doctest::Approx(16 * kPi * kPi));
}

TEST_CASE("Monte Carlo agrees with quadrature on hopf maps") {
  const SphereMap h = hopf_map();
  for (double s : {0.5, 0.8}) {
    const EnergyParams params = EnergyParams::critical_for(s, 3);
    const EnergyEstimate e = energy_mc(h, params, Region::whole(3), mc(500000, 6));
    const double q = energy_quadrature(h, params, {.resolution = 2});
    CHECK_MESSAGE(within(e.value, e.std_error, q, 0.0), s, ": ", e.value, " +- ", e.std_error, " vs ", q);
    REQUIRE(e.remainder_bound);
    CHECK(*e.remainder_bound < e.std_error);
  }
}

TEST_CASE("quadrature converges under refinement") {
  const SphereMap u = composed_with_hopf(multi_bubble(2, SpherePoint::basis(2, 0)));
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  const double r2 = energy_quadrature(u, params, {.resolution = 2});
  const double r4 = energy_quadrature(u, params, {.resolution = 4});
  CHECK(std::abs(r2 - r4) / r4 < 1e-2);
}

TEST_CASE("quadrature refuses oversize budgets") {
  QuadratureOptions o;
  o.resolution = 64;
  o.pair_budget = 1000;
  CHECK(quadrature_pairs(3, o) > o.pair_budget);
  CHECK_THROWS_AS(energy_quadrature(hopf_map(), EnergyParams::critical_for(0.5, 3), o), BudgetError);
}

TEST_CASE("energy is rotation invariant") {
  const SphereMap h = hopf_map();
  Rng rng = make_stream(7);
  const Rotation r3 = rotation_taking(SpherePoint::basis(3, 0), sample_uniform(3, rng));
  const Rotation r2 = rotation_taking(SpherePoint::basis(2, 0), sample_uniform(2, rng));
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  const EnergyEstimate base = energy_mc(h, params, Region::whole(3), mc(300000, 8));
  const EnergyEstimate domain = energy_mc(compose(h, rotation_map(r3)), params, Region::whole(3), mc(300000, 9));
  const EnergyEstimate target = energy_mc(compose(rotation_map(r2), h), params, Region::whole(3), mc(300000, 10));
  CHECK(within(base.value, base.std_error, domain.value, domain.std_error));
  CHECK(within(base.value, base.std_error, target.value, target.std_error));
  // Quadrature sees the same value up to discretisation.
  const double qa = energy_quadrature(h, params, {.resolution = 2});
  const double qb = energy_quadrature(compose(h, rotation_map(r3)), params, {.resolution = 2});
  CHECK(std::abs(qa - qb) / qa < 1e-2);
}

TEST_CASE("serial and parallel estimates are bit-identical") {
  const SphereMap u = prescribed_hopf_map(5);
  const EnergyParams params = EnergyParams::critical_for(0.8, 3);
  const EnergyEstimate a = energy_mc(u, params, Region::whole(3), mc(50000, 11, Execution::Serial));
  const EnergyEstimate b = energy_mc(u, params, Region::whole(3), mc(50000, 11, Execution::Parallel));
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  REQUIRE(a.strata.size() == b.strata.size());
  for (std::size_t j = 0; j < a.strata.size(); ++j) CHECK(a.strata[j].contribution == b.strata[j].contribution);
  QuadratureOptions qs{.resolution = 1, .execution = Execution::Serial};
  QuadratureOptions qp{.resolution = 1, .execution = Execution::Parallel};
  CHECK(energy_quadrature(u, params, qs) == energy_quadrature(u, params, qp));
  // Same seed, same answer; different seed, different answer.
  CHECK(energy_mc(u, params, Region::whole(3), mc(50000, 11)).value == a.value);
  CHECK(energy_mc(u, params, Region::whole(3), mc(50000, 12)).value != a.value);
}

TEST_CASE("standard error decays like N^{-1/2}") {
  const SphereMap h = hopf_map();
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  const double lo = energy_mc(h, params, Region::whole(3), mc(25000, 13)).std_error;
  const double hi = energy_mc(h, params, Region::whole(3), mc(400000, 13)).std_error;
  CHECK(lo / hi == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("energy_mc rejects bad input") {
  const SphereMap h = hopf_map();
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  CHECK_THROWS_AS(energy_mc(h, params, Region::whole(3), mc(999, 1)), ParameterError);
  CHECK_THROWS_AS(energy_mc(h, params, Region::whole(2), mc(10000, 1)), DimensionError);
  CHECK_THROWS_AS(energy_mc(identity_map(2), params, Region::whole(3), mc(10000, 1)), DimensionError);
  const GeodesicBall ball(SpherePoint::basis(3, 0), 0.5);
  CHECK_THROWS_AS(Region::difference(ball, ball), RegionError);
  const Vec tilted = exp_map(SpherePoint::basis(3, 0).coords(), SpherePoint::basis(3, 1).coords(), 0.3);
  CHECK_THROWS_AS(Region::difference(ball, GeodesicBall(SpherePoint(tilted), 0.5)), RegionError);
  CHECK_THROWS_AS(Region::from_json({{"kind", "torus"}}), RegionError);
}

TEST_CASE("regions") {
  const GeodesicBall small(SpherePoint::basis(3, 0), 0.4);
  const GeodesicBall big(SpherePoint::basis(3, 0), 1.2);
  CHECK(Region::ball(big).measure() == doctest::Approx(cap_measure(3, 1.2)));
  CHECK(Region::complement(small).measure() == doctest::Approx(sphere_measure(3) - cap_measure(3, 0.4)));
  CHECK(Region::difference(big, small).measure() == doctest::Approx(cap_measure(3, 1.2) - cap_measure(3, 0.4)));
  Rng rng = make_stream(14);
  for (const Region& r : {Region::ball(big), Region::complement(small), Region::difference(big, small)}) {
    for (int i = 0; i < 1000; ++i) CHECK(r.contains(r.sample(rng)));
    const Region back = Region::from_json(r.to_json());
    CHECK(back.kind() == r.kind());
    CHECK(back.measure() == r.measure());
  }
}

TEST_CASE("energy is monotone in the region") {
  const SphereMap h = hopf_map();
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  const SpherePoint c = SpherePoint::basis(3, 0);
  double last = 0.0, last_se = 0.0;
  for (double rho : {0.4, 0.8, 1.6}) {
    const EnergyEstimate e = energy_mc(h, params, Region::ball(GeodesicBall(c, rho)), mc(100000, 15));
    CHECK(e.value + 3 * std::hypot(e.std_error, last_se) >= last);
    last = e.value;
    last_se = e.std_error;
  }
  const EnergyEstimate whole = energy_mc(h, params, Region::whole(3), mc(100000, 15));
  CHECK(whole.value + 3 * std::hypot(whole.std_error, last_se) >= last);
}

TEST_CASE("estimate JSON") {
  const EnergyEstimate e = energy_mc(hopf_map(), EnergyParams::critical_for(0.5, 3), Region::whole(3), mc(10000, 16));
  const nlohmann::json j = to_json(e);
  for (const char* key : {"value", "std_error", "n_samples", "seed", "strata", "remainder_bound", "sampling", "region"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j.at("n_samples").get<std::int64_t>() == e.n_samples);
  CHECK(j.at("strata").size() == e.strata.size());
  double sum = 0.0;
  for (const auto& s : e.strata) sum += s.contribution;
  CHECK(sum == doctest::Approx(e.value).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre rules") {
  std::vector<double> x, w;
  for (int q = 1; q <= 12; ++q) {
    gauss_legendre(q, x, w);
    // Exact for polynomials of degree 2q - 1.
    for (int k = 0; k <= 2 * q - 1; ++k) {
      double sum = 0.0;
      for (int i = 0; i < q; ++i) sum += w[i] * std::pow(x[i], k);
      const double want = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(sum == doctest::Approx(want).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0, x, w), ParameterError);
}

TEST_CASE("patching bound") {
  const SphereMap u = prescribed_hopf_map(7);
  const std::vector<SphereMap> pieces = patch_pieces(u);
  CHECK(pieces.size() == 4);
  const PatchingReport r = check_patching_bound(pieces, u, EnergyParams::critical_for(0.5, 3), mc(100000, 17));
  CHECK(r.holds);
  CHECK(r.lhs <= r.rhs);
  CHECK(r.ratio == doctest::Approx(1.0).epsilon(0.1));
  CHECK(to_json(r).contains("ratio"));
  // A map that is not a patch is its own piece.
  CHECK(patch_pieces(hopf_map()).size() == 1);
}

TEST_CASE("gluing bound") {
  const EnergyParams params = EnergyParams::critical_for(0.5, 3);
  const SpherePoint c = SpherePoint::basis(3, 0);
  const GluingReport r = check_gluing_bound(hopf_map(), Region::whole(3), c, 0.5, 1.0, params, mc(100000, 18));
  CHECK(r.finite);
  CHECK(r.holds);
  CHECK(r.constant >= 0.0);
  CHECK(r.a == doctest::Approx(1.0 / std::pow(0.5, 4.0)));
  CHECK(r.b == doctest::Approx(std::pow(0.5, 3.0) / 0.5));
  const GluingReport zero = check_gluing_bound(constant_map(3, SpherePoint::basis(2, 0)), Region::whole(3), c, 0.5, 1.0, params, mc(10000, 18));
  CHECK(zero.constant == 0.0);
  CHECK(zero.holds);
  CHECK_THROWS_AS(check_gluing_bound(hopf_map(), Region::whole(3), c, 1.0, 1.0, params, mc(10000, 18)), ParameterError);
  CHECK_THROWS_AS(check_gluing_bound(hopf_map(), Region::ball(GeodesicBall(c, 0.5)), c, 0.5, 1.0, params, mc(10000, 18)), RegionError);
}

TEST_CASE("fiber comparison") {
  const FiberComparison f = fiber_energy_comparison(multi_bubble(1, SpherePoint::basis(2, 0)), 0.5, mc(100000, 19));
  REQUIRE(f.ratio);
  CHECK(*f.ratio > 0.0);
  CHECK(f.total.params.n == 3);
  CHECK(f.base.params.n == 2);
  CHECK(f.base.params.p == f.total.params.p);
  const FiberComparison c = fiber_energy_comparison(constant_map(2, SpherePoint::basis(2, 0)), 0.5, mc(10000, 19));
  CHECK_FALSE(c.ratio);
  CHECK(to_json(c).at("ratio").is_null());
  CHECK_THROWS_AS(fiber_energy_comparison(hopf_map(), 0.5, mc(10000, 19)), DimensionError);
}
