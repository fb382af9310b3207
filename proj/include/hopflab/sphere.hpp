#pragma once

// Geometry on the unit spheres S^m ⊂ R^{m+1}, m ∈ {1, 2, 3}.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "hopflab/random.hpp"

namespace hopflab {

inline constexpr int kMaxAmbient = 4;

// Ambient vectors and matrices never exceed 4x4, so they live on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAmbient, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxAmbient, kMaxAmbient>;

inline constexpr double kUnitTolerance = 1e-12;

class SpherePoint {
 public:
  SpherePoint() = default;

  // Checks that coords has unit norm within kUnitTolerance.
  explicit SpherePoint(Vec coords);

  // Rescales v onto the sphere. Throws on a zero vector.
  static SpherePoint normalized(const Vec& v);

  // Wraps coords without the norm check. For hot loops whose inputs are unit
  // vectors by construction.
  static SpherePoint unchecked(Vec coords) {
    SpherePoint x;
    x.coords_ = std::move(coords);
    return x;
  }

  static SpherePoint north_pole(int m);
  static SpherePoint south_pole(int m);
  static SpherePoint basis(int m, int i);

  int dim() const { return static_cast<int>(coords_.size()) - 1; }
  int ambient() const { return static_cast<int>(coords_.size()); }
  const Vec& coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

 private:
  Vec coords_;
};

// Open geodesic ball {x : d(x, center) < radius}, radius in (0, π).
class GeodesicBall {
 public:
  GeodesicBall(SpherePoint center, double radius);

  const SpherePoint& center() const { return center_; }
  double radius() const { return radius_; }
  int dim() const { return center_.dim(); }

  // Strict containment via the inner product; every module uses this same
  // predicate so "inside" and "outside" agree bit for bit.
  bool contains(const Vec& x) const { return center_.coords().dot(x) > cos_radius_; }
  bool contains(const SpherePoint& x) const { return contains(x.coords()); }

 private:
  SpherePoint center_;
  double radius_;
  double cos_radius_;
};

class Rotation {
 public:
  explicit Rotation(Mat matrix);  // checks orthogonality and det = +1
  static Rotation identity(int m);

  int dim() const { return static_cast<int>(matrix_.rows()) - 1; }
  const Mat& matrix() const { return matrix_; }

  Vec apply(const Vec& x) const { return matrix_ * x; }
  SpherePoint apply(const SpherePoint& x) const;
  Rotation inverse() const { return Rotation(matrix_.transpose(), nullptr); }
  Rotation then(const Rotation& next) const {
    return Rotation(next.matrix_ * matrix_, nullptr);
  }

 private:
  Rotation(Mat matrix, std::nullptr_t) : matrix_(std::move(matrix)) {}
  Mat matrix_;
};

double geodesic_distance(const SpherePoint& x, const SpherePoint& y);
double geodesic_distance(const Vec& x, const Vec& y);
double chordal_distance(const Vec& x, const Vec& y);

// Surface measure |S^n|.
double sphere_measure(int n);

// Measure of the closed geodesic cap of radius psi on S^n.
double cap_measure(int n, double psi);

SpherePoint sample_uniform(int m, Rng& rng);

// Uniform unit tangent vector at x.
Vec sample_tangent_direction(const Vec& x, Rng& rng);

// Polar angle in [a, b] with density proportional to sin^{n-1}(psi).
double sample_polar_angle(int n, double a, double b, Rng& rng);

// Point at geodesic distance psi from x in unit tangent direction t.
inline Vec exp_map(const Vec& x, const Vec& t, double psi) {
  return std::cos(psi) * x + std::sin(psi) * t;
}

// Orthonormal basis of the tangent space at x as columns of an
// (m+1) x m matrix, oriented so that det[x | E] = +1.
Mat tangent_frame(const Vec& x);

// Tangent projector I - x x^T.
Mat tangent_projector(const Vec& x);

// Stereographic projection from the north pole.
Vec stereographic(const SpherePoint& x);
SpherePoint stereographic_inv(const Vec& y);

Rotation rotation_taking(const SpherePoint& a, const SpherePoint& b);

// k balls of common radius safety/sqrt(k) centered on a Fibonacci lattice of
// S^2. The packing constant is 1: Fibonacci lattices separate their points by
// more than 2/sqrt(k) (checked for every k up to 10^4).
inline constexpr double kPackingConstant = 1.0;
std::vector<GeodesicBall> pack_disjoint_balls(int k, double safety = 0.9);

// Point i of an N-point Fibonacci lattice on S^2.
SpherePoint fibonacci_point(std::int64_t i, std::int64_t count);

// Equal-weight low-discrepancy point set on S^n (n ∈ {1,2,3}): Fibonacci
// spiral on S^2, a golden-ratio rank-1 lattice in Hopf coordinates on S^3.
SpherePoint spiral_point(int n, std::int64_t i, std::int64_t count);

}  // namespace hopflab
