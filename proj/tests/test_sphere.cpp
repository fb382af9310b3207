#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"

#include "hopflab/errors.hpp"
#include "hopflab/sphere.hpp"

using namespace hopflab;

namespace {

constexpr double kPi = std::numbers::pi;

SpherePoint e(int m, int i) { return SpherePoint::basis(m, i); }

Vec random_vector(int n, Rng& rng, double scale) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * (2.0 * uniform01(rng) - 1.0);
  return v;
}

}  // namespace

TEST_CASE("geodesic distance of basis vectors") {
  CHECK(geodesic_distance(e(2, 0), e(2, 0)) == 0.0);
  CHECK(geodesic_distance(e(2, 0), SpherePoint::normalized(-e(2, 0).coords())) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(geodesic_distance(e(2, 0), e(2, 1)) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK_THROWS_AS(geodesic_distance(e(2, 0), e(3, 0)), DimensionError);
}

TEST_CASE("geodesic distance is symmetric and satisfies the triangle inequality") {
  Rng rng = make_stream(11);
  for (int i = 0; i < 2000; ++i) {
    const int m = 1 + i % 3;
    const SpherePoint x = sample_uniform(m, rng);
    const SpherePoint y = sample_uniform(m, rng);
    const SpherePoint z = sample_uniform(m, rng);
    CHECK(geodesic_distance(x, y) == geodesic_distance(y, x));
    CHECK(geodesic_distance(x, z) <= geodesic_distance(x, y) + geodesic_distance(y, z) + 1e-10);
    const double acos_form = std::acos(std::clamp(x.coords().dot(y.coords()), -1.0, 1.0));
    CHECK(std::abs(geodesic_distance(x, y) - acos_form) < 1e-7);
  }
}

TEST_CASE("sphere point validation") {
  Vec v(3);
  v << 1.0, 1e-5, 0.0;
  CHECK_THROWS_AS(SpherePoint{v}, ParameterError);
  CHECK_THROWS_AS(SpherePoint::normalized(Vec::Zero(3)), ParameterError);
  CHECK_THROWS_AS(GeodesicBall(e(2, 0), 0.0), ParameterError);
  CHECK_THROWS_AS(GeodesicBall(e(2, 0), kPi), ParameterError);
}

TEST_CASE("uniform sampling on S^2") {
  Rng rng = make_stream(5);
  constexpr int n = 100000;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  int upper = 0;
  double worst_norm = 0.0;
  for (int i = 0; i < n; ++i) {
    const SpherePoint x = sample_uniform(2, rng);
    mean += x.coords();
    if (x[2] > 0.0) ++upper;
    worst_norm = std::max(worst_norm, std::abs(x.coords().norm() - 1.0));
  }
  mean /= n;
  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
  CHECK(std::abs(upper / static_cast<double>(n) - 0.5) < 0.01);
  CHECK(worst_norm < 1e-12);
}

TEST_CASE("sampling is deterministic given the stream") {
  Rng a = make_stream(9, 3, 4);
  Rng b = make_stream(9, 3, 4);
  for (int i = 0; i < 100; ++i) CHECK(sample_uniform(3, a) == sample_uniform(3, b));
}

TEST_CASE("cap and sphere measures match closed forms") {
  CHECK(sphere_measure(1) == doctest::Approx(2 * kPi));
  CHECK(sphere_measure(2) == doctest::Approx(4 * kPi));
  CHECK(sphere_measure(3) == doctest::Approx(2 * kPi * kPi));
  for (double psi : {1e-6, 1e-3, 0.1, 1.0, 2.0, kPi}) {
    CHECK(cap_measure(1, psi) == doctest::Approx(2 * psi).epsilon(1e-13));
    CHECK(cap_measure(2, psi) == doctest::Approx(4 * kPi * std::pow(std::sin(psi / 2), 2)).epsilon(1e-12));
    // Small-angle series avoids the cancellation in psi - sin psi cos psi.
    const double closed = psi >= 0.1 ? 2 * kPi * (psi - std::sin(psi) * std::cos(psi))
                                    : 2 * kPi * (2 * std::pow(psi, 3) / 3 - 2 * std::pow(psi, 5) / 15 +
                                                 4 * std::pow(psi, 7) / 315 - 2 * std::pow(psi, 9) / 2835);
    CHECK(cap_measure(3, psi) == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("polar angle sampling follows sin^{n-1}") {
  Rng rng = make_stream(21);
  // E[cos psi] on [0, pi/2] for S^2 is 1/2; for S^3 it is (1/3) / (pi/4).
  double m2 = 0.0;
  double m3 = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double a = sample_polar_angle(2, 0.0, kPi / 2, rng);
    const double b = sample_polar_angle(3, 0.0, kPi / 2, rng);
    REQUIRE(a >= 0.0);
    REQUIRE(a <= kPi / 2);
    m2 += std::cos(a);
    m3 += std::cos(b);
  }
  CHECK(m2 / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(m3 / n == doctest::Approx(4.0 / (3.0 * kPi)).epsilon(0.01));
  for (int i = 0; i < 1000; ++i) {
    const double psi = sample_polar_angle(3, 1.0, 2.5, rng);
    CHECK(psi >= 1.0);
    CHECK(psi <= 2.5);
  }
}

TEST_CASE("tangent frames are orthonormal and positively oriented") {
  Rng rng = make_stream(4);
  for (int m = 1; m <= 3; ++m) {
    for (int i = 0; i < 200; ++i) {
      const Vec x = sample_uniform(m, rng).coords();
      const Mat f = tangent_frame(x);
      REQUIRE(f.rows() == m + 1);
      REQUIRE(f.cols() == m);
      CHECK((f.transpose() * f - Mat::Identity(m, m)).norm() < 1e-12);
      CHECK((f.transpose() * x).norm() < 1e-12);
      Mat full(m + 1, m + 1);
      full << x, f;
      CHECK(full.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("stereographic projection") {
  CHECK(stereographic(SpherePoint::south_pole(2)).norm() == 0.0);
  CHECK(stereographic(e(2, 0)).norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(stereographic(SpherePoint::north_pole(3)), SingularInputError);

  CHECK(stereographic_inv(Vec::Zero(3)) == SpherePoint::south_pole(3));
  Vec unit(2);
  unit << 0.6, 0.8;
  CHECK(std::abs(stereographic_inv(unit)[2]) < 1e-15);
  Vec far(3);
  far << 1e7, 0.0, 0.0;
  const SpherePoint near_pole = stereographic_inv(far);
  CHECK(near_pole[3] > 1.0 - 1e-12);
  CHECK_FALSE(near_pole == SpherePoint::north_pole(3));

  Rng rng = make_stream(8);
  for (int i = 0; i < 5000; ++i) {
    const int m = 1 + i % 3;
    const double scale = std::pow(10.0, -3.0 + 6.0 * uniform01(rng));
    const Vec y = random_vector(m, rng, scale);
    const Vec back = stereographic(stereographic_inv(y));
    CHECK((back - y).norm() <= 1e-10 * std::max(1.0, y.norm()));
  }
}

TEST_CASE("rotation_taking") {
  CHECK((rotation_taking(e(3, 1), e(3, 1)).matrix() - Mat::Identity(4, 4)).norm() == 0.0);
  const Rotation r = rotation_taking(e(2, 0), e(2, 1));
  CHECK((r.apply(e(2, 0).coords()) - e(2, 1).coords()).norm() < 1e-10);
  CHECK((r.apply(e(2, 2).coords()) - e(2, 2).coords()).norm() < 1e-10);

  Rng rng = make_stream(13);
  for (int i = 0; i < 500; ++i) {
    const int m = 1 + i % 3;
    const SpherePoint a = sample_uniform(m, rng);
    const SpherePoint b = i % 7 == 0 ? SpherePoint::normalized(-a.coords()) : sample_uniform(m, rng);
    const Rotation q = rotation_taking(a, b);
    CHECK((q.apply(a.coords()) - b.coords()).norm() < 1e-10);
    CHECK(q.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-10));
    const Vec v = random_vector(m + 1, rng, 1.0);
    CHECK(std::abs(q.apply(v).norm() - v.norm()) < 1e-10);
    if (m >= 2 && i % 7 != 0) {
      // A vector orthogonal to a and b is fixed.
      Vec w = random_vector(m + 1, rng, 1.0);
      Mat basis(m + 1, 2);
      basis << a.coords(), b.coords();
      const Eigen::HouseholderQR<Mat> qr(basis);
      const Mat qm = qr.householderQ();
      const Mat span = qm.leftCols(2);
      w -= span * (span.transpose() * w);
      CHECK((q.apply(w) - w).norm() < 1e-10);
    }
  }
}

TEST_CASE("antipodal rotation uses the first basis vector not parallel to a") {
  const SpherePoint a = e(2, 0);
  const SpherePoint b = SpherePoint::normalized(-a.coords());
  const Rotation q = rotation_taking(a, b);
  // Plane span{e0, e1}; e2 is fixed.
  CHECK((q.apply(e(2, 2).coords()) - e(2, 2).coords()).norm() < 1e-12);
  CHECK((q.apply(a.coords()) - b.coords()).norm() < 1e-12);
}

TEST_CASE("pack_disjoint_balls") {
  const auto one = pack_disjoint_balls(1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].radius() == doctest::Approx(kPackingConstant * 0.9));

  auto check_disjoint = [](int k) {
    const auto balls = pack_disjoint_balls(k);
    REQUIRE(static_cast<int>(balls.size()) == k);
    const double radius = kPackingConstant * 0.9 / std::sqrt(static_cast<double>(k));
    double closest = kPi;
    for (int i = 0; i < k; ++i) {
      CHECK(balls[i].radius() == doctest::Approx(radius).epsilon(1e-15));
      for (int j = i + 1; j < k; ++j) {
        closest = std::min(closest, geodesic_distance(balls[i].center(), balls[j].center()));
      }
    }
    return closest / radius;
  };
  CHECK(check_disjoint(4) > 2.0);
  CHECK(check_disjoint(100) > 2.0);
  for (int k : {2, 3, 5, 7, 9, 16, 25, 50, 250, 1000}) CHECK(check_disjoint(k) > 2.0);
  CHECK_THROWS_AS(pack_disjoint_balls(0), ParameterError);
}

TEST_CASE("Fibonacci lattices separate points by 2/sqrt(k)") {
  for (int k : {2, 3, 10, 37, 100, 613, 2000, 10000}) {
    std::vector<Vec> pts;
    for (int i = 0; i < k; ++i) pts.push_back(fibonacci_point(i, k).coords());
    double closest = kPi;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) closest = std::min(closest, geodesic_distance(pts[i], pts[j]));
    }
    CHECK(closest * std::sqrt(static_cast<double>(k)) >= 2.0);
  }
}

TEST_CASE("spiral points are unit vectors with mean near zero") {
  for (int n = 1; n <= 3; ++n) {
    constexpr int count = 4096;
    Vec mean = Vec::Zero(n + 1);
    for (int i = 0; i < count; ++i) {
      const Vec x = spiral_point(n, i, count).coords();
      CHECK(std::abs(x.norm() - 1.0) < 1e-12);
      mean += x;
    }
    CHECK((mean / count).norm() < 0.01);
  }
}
