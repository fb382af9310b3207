#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "hopflab/constructions.hpp"
#include "hopflab/errors.hpp"
#include "hopflab/topology.hpp"

using namespace hopflab;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) out[i++] = c;
  return out;
}

ClosedCurve analytic_fiber(const SpherePoint& z, int n = 400) {
  ClosedCurve c;
  for (int j = 0; j < n; ++j) c.points.push_back(hopf_fiber_point(z, 2 * kPi * j / n).coords());
  c.tolerance = c.max_gap();
  return c;
}

// Round circle cos(t) a + sin(t) b scaled into a small cap around `center`.
ClosedCurve small_circle(const Vec& center, const Vec& a, const Vec& b, double radius, int n = 300) {
  ClosedCurve c;
  for (int j = 0; j < n; ++j) {
    const double t = 2 * kPi * j / n;
    c.points.push_back((center + radius * (std::cos(t) * a + std::sin(t) * b)).normalized());
  }
  c.tolerance = c.max_gap();
  return c;
}

ClosedCurve reversed(ClosedCurve c) {
  std::reverse(c.points.begin(), c.points.end());
  return c;
}

double distance_to(const ClosedCurve& c, const Vec& x) {
  double best = 1e300;
  for (const auto& p : c.points) best = std::min(best, (p - x).norm());
  return best;
}

}  // namespace

TEST_CASE("degree reports round to the nearest integer") {
  const DegreeReport r = DegreeReport::from_raw(2.96, DegreeMethod::Linking);
  CHECK(r.value == 3);
  CHECK(r.residual == doctest::Approx(0.04));
  CHECK(DegreeReport::from_raw(-1.2, DegreeMethod::JacobianIntegral).value == -1);
  CHECK(to_string(DegreeMethod::Bookkeeping) == "bookkeeping");
  CHECK(to_json(r).at("method") == "linking");
}

TEST_CASE("mapping_degree of examples") {
  const SpherePoint b = SpherePoint::basis(2, 0);
  Rng rng = make_stream(1);
  CHECK(mapping_degree(identity_map(2), 20000).value == 1);
  CHECK(mapping_degree(identity_map(3), 20000).value == 1);
  CHECK(mapping_degree(constant_map(2, b), 20000).raw == 0.0);
  CHECK(mapping_degree(bump_deg1(sample_uniform(2, rng), 0.2, b), 20000).value == 1);
  CHECK(mapping_degree(bump_deg1(sample_uniform(3, rng), 0.2, SpherePoint::basis(3, 0)), 20000).value == 1);
  for (int k : {1, 2, 3, 5, 9}) {
    const DegreeReport r = mapping_degree(multi_bubble(k, b), 20000);
    CHECK(r.value == k);
    CHECK(r.residual < 1e-6);
    CHECK(r.method == DegreeMethod::JacobianIntegral);
  }
  // A reflection reverses orientation.
  Mat m = Mat::Identity(3, 3);
  m(2, 2) = -1.0;
  const SphereMap reflection(SphereMap::Parts{
      .domain_dim = 2, .codomain_dim = 2, .eval = [m](const Vec& x) { return Vec(m * x); },
      .descriptor = {{"type", "reflection"}}});
  CHECK(mapping_degree(reflection, 20000).value == -1);
  CHECK_THROWS_AS(mapping_degree(hopf_map(), 20000), DimensionError);
  CHECK_THROWS_AS(mapping_degree(identity_map(2), 999), ParameterError);
}

TEST_CASE("mapping_degree is stable under grid doubling") {
  // Composition with a rotation hides the support, forcing the global grid.
  Rng rng = make_stream(2);
  const SpherePoint b = SpherePoint::basis(2, 0);
  const SphereMap u = compose(rotation_map(rotation_taking(b, sample_uniform(2, rng))), bump_deg1(b, 0.5, b));
  const DegreeReport a = mapping_degree(u, 20000);
  const DegreeReport c = mapping_degree(u, 40000);
  CHECK(a.value == 1);
  CHECK(c.value == 1);
  CHECK(a.residual < 0.05);
  CHECK(c.residual < 0.05);
}

TEST_CASE("mapping_degree serial and parallel agree bit for bit") {
  const SphereMap u = multi_bubble(4, SpherePoint::basis(2, 0));
  CHECK(mapping_degree(u, 20000, Execution::Serial).raw == mapping_degree(u, 20000, Execution::Parallel).raw);
  CHECK(mapping_degree(identity_map(3), 5000, Execution::Serial).raw ==
        mapping_degree(identity_map(3), 5000, Execution::Parallel).raw);
}

TEST_CASE("trace_fiber follows hopf fibers") {
  const SphereMap h = hopf_map();
  Rng rng = make_stream(3);
  for (int i = 0; i < 4; ++i) {
    const SpherePoint z = sample_uniform(2, rng);
    const std::vector<ClosedCurve> fiber = trace_fiber(h, z, fiber_seeds(h, z));
    REQUIRE(fiber.size() == 1);
    const ClosedCurve& c = fiber.front();
    CHECK(c.length() == doctest::Approx(2 * kPi).epsilon(1e-3));
    CHECK(c.max_gap() <= c.tolerance);
    const ClosedCurve exact = analytic_fiber(z, 20000);
    double hausdorff = 0.0;
    for (const auto& p : c.points) {
      CHECK((h.eval(p) - z.coords()).norm() < 1e-8);
      CHECK(std::abs(p.norm() - 1.0) < 1e-12);
      hausdorff = std::max(hausdorff, distance_to(exact, p));
    }
    for (std::size_t j = 0; j < exact.points.size(); j += 50) {
      hausdorff = std::max(hausdorff, distance_to(c, exact.points[j]));
    }
    CHECK(hausdorff < 2e-3);
  }
}

TEST_CASE("trace_fiber edge cases") {
  const SpherePoint b = SpherePoint::basis(2, 0);
  const SphereMap c = constant_map(3, b);
  const SpherePoint elsewhere = SpherePoint::basis(2, 1);
  CHECK(fiber_seeds(c, elsewhere).empty());
  CHECK(trace_fiber(c, elsewhere, {}).empty());
  // Several seeds on one fiber yield one component.
  const SphereMap h = hopf_map();
  std::vector<Vec> seeds;
  for (double t : {0.0, 1.0, 2.0, 3.0}) seeds.push_back(hopf_fiber_point(elsewhere, t).coords());
  CHECK(trace_fiber(h, elsewhere, seeds).size() == 1);
  TraceOptions bad;
  bad.step = 0.5;
  CHECK_THROWS_AS(trace_fiber(h, elsewhere, seeds, bad), ParameterError);
  CHECK_THROWS_AS(trace_fiber(identity_map(3), SpherePoint::basis(3, 0), {}), DimensionError);
}

TEST_CASE("gauss_linking") {
  const SpherePoint east = SpherePoint::basis(2, 0);
  const SpherePoint west(vec({-1, 0, 0}));
  const ClosedCurve a = analytic_fiber(east);
  const ClosedCurve b = analytic_fiber(west);
  const DegreeReport ab = gauss_linking(a, b);
  CHECK(std::abs(ab.value) == 1);
  CHECK(ab.residual < 1e-3);
  CHECK(gauss_linking(reversed(a), b).value == -ab.value);
  CHECK(gauss_linking(a, reversed(b)).value == -ab.value);
  CHECK(gauss_linking(b, a).raw == ab.raw);
  CHECK(gauss_linking(a, b, Execution::Serial).raw == ab.raw);

  // Two small circles in far apart caps do not link.
  const ClosedCurve u = small_circle(vec({1, 0, 0, 0}), vec({0, 1, 0, 0}), vec({0, 0, 1, 0}), 0.2);
  const ClosedCurve v = small_circle(vec({0, 0, 0, 1}), vec({0, 1, 0, 0}), vec({1, 0, 0, 0}), 0.2);
  const DegreeReport uv = gauss_linking(u, v);
  CHECK(uv.value == 0);
  CHECK(uv.residual < 1e-3);

  CHECK_THROWS_AS(gauss_linking(a, a), IllConditionedLinkingError);
  ClosedCurve tiny;
  tiny.points = {a.points[0], a.points[1]};
  CHECK_THROWS_AS(gauss_linking(tiny, b), ParameterError);
}

TEST_CASE("hopf_invariant") {
  HopfOptions o;
  o.seed = 5;
  const DegreeReport h = hopf_invariant(hopf_map(), o);
  CHECK(h.value == 1);
  CHECK(h.residual < 0.05);
  CHECK(h.method == DegreeMethod::Linking);
  CHECK(hopf_invariant(prescribed_hopf_map(1), o).value == 1);
  CHECK(hopf_invariant(constant_map(3, SpherePoint::basis(2, 0)), o).value == 0);
  CHECK(hopf_invariant(compose(hopf_map(), orientation_flip()), o).value == -1);
  CHECK_THROWS_AS(hopf_invariant(identity_map(2), o), DimensionError);
}

TEST_CASE("hopf_invariant is rotation invariant") {
  Rng rng = make_stream(6);
  const Rotation r3 = rotation_taking(SpherePoint::basis(3, 0), sample_uniform(3, rng));
  const Rotation r2 = rotation_taking(SpherePoint::basis(2, 0), sample_uniform(2, rng));
  HopfOptions o;
  o.seed = 7;
  CHECK(hopf_invariant(compose(hopf_map(), rotation_map(r3)), o).value == 1);
  CHECK(hopf_invariant(compose(rotation_map(r2), hopf_map()), o).value == 1);
}

TEST_CASE("hopf_invariant of a degree two map") {
  HopfOptions o;
  o.seed = 8;
  const HopfResult r = hopf_invariant_detailed(prescribed_hopf_map(2), o);
  CHECK(r.report.value == 2);
  CHECK(r.report.residual < 0.05);
  CHECK(r.fiber1.size() >= 1);
  CHECK(geodesic_distance(r.target1, r.target2) >= 0.3);
}

TEST_CASE("bookkept_degree") {
  const SpherePoint b = SpherePoint::basis(2, 0);
  CHECK(bookkept_degree(identity_map(3).descriptor()).value == 1);
  CHECK(bookkept_degree(constant_map(3, b).descriptor()).value == 0);
  CHECK(bookkept_degree(orientation_flip().descriptor()).value == -1);
  CHECK(bookkept_degree(hopf_map().descriptor()).value == 1);
  CHECK(bookkept_degree(multi_bubble(6, b).descriptor()).value == 6);
  CHECK(bookkept_degree(composed_with_hopf(multi_bubble(3, b)).descriptor()).value == 9);
  CHECK(bookkept_degree(hopf_bump(SpherePoint::basis(3, 0), 0.3, b).descriptor()).value == 1);
  for (std::int64_t d : {0, 1, 2, 5, 7, 9, 16, -3, -10}) {
    const DegreeReport r = bookkept_degree(prescribed_hopf_map(d).descriptor());
    CHECK(r.value == d);
    CHECK(r.residual == 0.0);
    CHECK(r.method == DegreeMethod::Bookkeeping);
  }
  CHECK(bookkept_degree(compose(prescribed_hopf_map(5), orientation_flip()).descriptor()).value == -5);
  CHECK_THROWS_AS(bookkept_degree({{"type", "mystery"}}), DescriptorError);
  CHECK_THROWS_AS(bookkept_degree({{"type", "multi_bubble"}, {"k", 2}, {"bumps", nlohmann::json::array()}}), DescriptorError);
  CHECK_THROWS_AS(bookkept_degree(nlohmann::json::array()), DescriptorError);
}

TEST_CASE("curve serialisation") {
  const ClosedCurve c = analytic_fiber(SpherePoint::basis(2, 1), 50);
  const ClosedCurve back = curve_from_json(nlohmann::json::parse(to_json(c).dump()));
  REQUIRE(back.points.size() == c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) CHECK(back.points[i] == c.points[i]);
  CHECK(back.tolerance == c.tolerance);
  std::ostringstream text;
  write_plain_text(c, text);
  std::istringstream in(text.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    double v;
    int cols = 0;
    while (row >> v) ++cols;
    CHECK(cols == 4);
    ++lines;
  }
  CHECK(lines == 50);
}
