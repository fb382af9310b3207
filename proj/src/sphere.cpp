#include "hopflab/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hopflab/errors.hpp"

namespace hopflab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same_dim(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << x.size() << " vs " << y.size() << " coordinates";
    throw DimensionError(msg.str());
  }
}

// x - sin(x), accurate for small x.
double x_minus_sin(double x) {
  if (std::abs(x) < 0.1) {
    const double x2 = x * x;
    return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
  }
  return x - std::sin(x);
}

}  // namespace

SpherePoint::SpherePoint(Vec coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2 || coords_.size() > kMaxAmbient) {
    throw DimensionError("sphere points need 2 to 4 coordinates");
  }
  const double norm = coords_.norm();
  if (std::abs(norm - 1.0) > kUnitTolerance) {
    std::ostringstream msg;
    msg << "not a unit vector (norm " << norm << ")";
    throw ParameterError(msg.str());
  }
}

SpherePoint SpherePoint::normalized(const Vec& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ParameterError("cannot normalize a zero or non-finite vector");
  }
  return unchecked(v / norm);
}

SpherePoint SpherePoint::north_pole(int m) {
  Vec v = Vec::Zero(m + 1);
  v[m] = 1.0;
  return unchecked(v);
}

SpherePoint SpherePoint::south_pole(int m) {
  Vec v = Vec::Zero(m + 1);
  v[m] = -1.0;
  return unchecked(v);
}

SpherePoint SpherePoint::basis(int m, int i) {
  Vec v = Vec::Zero(m + 1);
  v[i] = 1.0;
  return unchecked(v);
}

GeodesicBall::GeodesicBall(SpherePoint center, double radius)
    : center_(std::move(center)), radius_(radius), cos_radius_(std::cos(radius)) {
  if (!(radius > 0.0 && radius < kPi)) {
    throw ParameterError("geodesic ball radius must lie in (0, pi)");
  }
}

Rotation::Rotation(Mat matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw DimensionError("rotation must be square");
  const Mat gram = matrix_ * matrix_.transpose();
  if ((gram - Mat::Identity(matrix_.rows(), matrix_.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw ParameterError("rotation matrix is not orthogonal");
  }
  if (std::abs(matrix_.determinant() - 1.0) > 1e-10) {
    throw ParameterError("rotation matrix must have determinant +1");
  }
}

Rotation Rotation::identity(int m) {
  return Rotation(Mat::Identity(m + 1, m + 1), nullptr);
}

SpherePoint Rotation::apply(const SpherePoint& x) const {
  if (x.ambient() != matrix_.rows()) throw DimensionError("rotation/point dimension mismatch");
  return SpherePoint::unchecked(matrix_ * x.coords());
}

double geodesic_distance(const Vec& x, const Vec& y) {
  require_same_dim(x, y);
  return 2.0 * std::atan2((x - y).norm(), (x + y).norm());
}

double geodesic_distance(const SpherePoint& x, const SpherePoint& y) {
  return geodesic_distance(x.coords(), y.coords());
}

double chordal_distance(const Vec& x, const Vec& y) {
  require_same_dim(x, y);
  return (x - y).norm();
}

double sphere_measure(int n) {
  // |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2)
  return 2.0 * std::pow(kPi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

double cap_measure(int n, double psi) {
  psi = std::clamp(psi, 0.0, kPi);
  switch (n) {
    case 1:
      return 2.0 * psi;
    case 2: {
      const double h = std::sin(0.5 * psi);
      return 4.0 * kPi * h * h;
    }
    case 3:
      // 2 pi (psi - sin psi cos psi) = pi (2 psi - sin 2 psi)
      return kPi * x_minus_sin(2.0 * psi);
    default:
      throw DimensionError("cap_measure supports S^1, S^2, S^3");
  }
}

SpherePoint sample_uniform(int m, Rng& rng) {
  if (m < 1 || m + 1 > kMaxAmbient) throw DimensionError("sample_uniform: m must be 1..3");
  Vec v(m + 1);
  double norm = 0.0;
  do {
    for (int i = 0; i <= m; ++i) v[i] = standard_normal(rng);
    norm = v.norm();
  } while (norm < 1e-300);
  return SpherePoint::unchecked(v / norm);
}

Vec sample_tangent_direction(const Vec& x, Rng& rng) {
  const auto dim = x.size();
  Vec v(dim);
  for (;;) {
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = standard_normal(rng);
    v -= x.dot(v) * x;
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

double sample_polar_angle(int n, double a, double b, Rng& rng) {
  if (n == 1) return a + (b - a) * uniform01(rng);
  if (b <= 0.5 * kPi) {
    // Proposal with density psi^{n-1}; accept with (sin psi / psi)^{n-1},
    // which is at least (2/pi)^{n-1} on [0, pi/2].
    const double an = std::pow(a, n);
    const double bn = std::pow(b, n);
    for (;;) {
      const double psi = std::pow(an + (bn - an) * uniform01(rng), 1.0 / n);
      const double ratio = psi > 0.0 ? std::sin(psi) / psi : 1.0;
      if (uniform01(rng) < std::pow(ratio, n - 1)) return psi;
    }
  }
  for (;;) {
    const double psi = a + (b - a) * uniform01(rng);
    if (uniform01(rng) < std::pow(std::sin(psi), n - 1)) return psi;
  }
}

Mat tangent_frame(const Vec& x) {
  const auto dim = x.size();
  Mat frame(dim, dim - 1);
  // Gram-Schmidt of the standard basis against x, skipping the basis vector
  // most aligned with x.
  Eigen::Index skip = 0;
  x.cwiseAbs().maxCoeff(&skip);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < dim && col < dim - 1; ++i) {
    if (i == skip) continue;
    Vec v = Vec::Zero(dim);
    v[i] = 1.0;
    v -= x.dot(v) * x;
    for (Eigen::Index j = 0; j < col; ++j) v -= frame.col(j).dot(v) * frame.col(j);
    frame.col(col++) = v.normalized();
  }
  Mat full(dim, dim);
  full.col(0) = x;
  full.rightCols(dim - 1) = frame;
  if (full.determinant() < 0.0) frame.col(0) = -frame.col(0);
  return frame;
}

Mat tangent_projector(const Vec& x) {
  return Mat::Identity(x.size(), x.size()) - x * x.transpose();
}

Vec stereographic(const SpherePoint& x) {
  const int m = x.dim();
  const double last = x[m];
  if (!(last < 1.0 - 1e-9)) {
    throw SingularInputError("stereographic projection undefined at the north pole");
  }
  const Vec head = x.coords().head(m);
  if (last > 0.0) {
    // 1 - x_m = |x'|^2 / (1 + x_m) avoids cancellation near the north pole.
    return head * ((1.0 + last) / head.squaredNorm());
  }
  return head / (1.0 - last);
}

SpherePoint stereographic_inv(const Vec& y) {
  const auto m = y.size();
  if (m < 1 || m + 1 > kMaxAmbient) throw DimensionError("stereographic_inv: bad dimension");
  const double q = y.squaredNorm();
  Vec x(m + 1);
  x.head(m) = (2.0 / (1.0 + q)) * y;
  x[m] = (q - 1.0) / (q + 1.0);
  return SpherePoint::unchecked(x);
}

Rotation rotation_taking(const SpherePoint& a, const SpherePoint& b) {
  if (a.ambient() != b.ambient()) throw DimensionError("rotation_taking: dimension mismatch");
  const int dim = a.ambient();
  const Vec& u = a.coords();
  const double c = std::clamp(u.dot(b.coords()), -1.0, 1.0);
  Vec w = b.coords() - c * u;
  double theta = geodesic_distance(a, b);
  if (theta == 0.0) return Rotation::identity(dim - 1);
  if (w.norm() < 1e-12) {
    // Antipodal: half turn in the plane of a and the first basis vector not
    // parallel to a.
    for (int i = 0; i < dim; ++i) {
      Vec e = Vec::Zero(dim);
      e[i] = 1.0;
      Vec cand = e - u.dot(e) * u;
      if (cand.norm() > 1e-6) {
        w = cand;
        break;
      }
    }
    theta = std::numbers::pi;
  }
  w.normalize();
  const Mat uu = u * u.transpose();
  const Mat ww = w * w.transpose();
  const Mat wu = w * u.transpose();
  Mat r = Mat::Identity(dim, dim) + (std::cos(theta) - 1.0) * (uu + ww) +
          std::sin(theta) * (wu - wu.transpose());
  return Rotation(r);
}

SpherePoint fibonacci_point(std::int64_t i, std::int64_t count) {
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = golden_angle * static_cast<double>(i);
  Vec v(3);
  v << rho * std::cos(phi), rho * std::sin(phi), z;
  return SpherePoint::unchecked(v / v.norm());
}

SpherePoint spiral_point(int n, std::int64_t i, std::int64_t count) {
  const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
  switch (n) {
    case 1: {
      Vec v(2);
      v << std::cos(2.0 * kPi * t), std::sin(2.0 * kPi * t);
      return SpherePoint::unchecked(v);
    }
    case 2:
      return fibonacci_point(i, count);
    case 3: {
      // Hopf coordinates (cos a e^{i xi1}, sin a e^{i xi2}); the volume element
      // is uniform in sin^2 a, xi1, xi2. The two angles follow the additive
      // recurrence of the plastic number (a 3D golden-ratio lattice).
      constexpr double plastic = 1.32471795724474602596;
      const double g1 = 1.0 / plastic;
      const double g2 = 1.0 / (plastic * plastic);
      const double di = static_cast<double>(i);
      const double u1 = std::fmod(0.5 + di * g1, 1.0);
      const double u2 = std::fmod(0.5 + di * g2, 1.0);
      const double sa = std::sqrt(t);
      const double ca = std::sqrt(1.0 - t);
      Vec v(4);
      v << ca * std::cos(2.0 * kPi * u1), ca * std::sin(2.0 * kPi * u1),
          sa * std::cos(2.0 * kPi * u2), sa * std::sin(2.0 * kPi * u2);
      return SpherePoint::unchecked(v / v.norm());
    }
    default:
      throw DimensionError("spiral_point supports S^1, S^2, S^3");
  }
}

std::vector<GeodesicBall> pack_disjoint_balls(int k, double safety) {
  if (k < 1) throw ParameterError("pack_disjoint_balls: k must be >= 1");
  if (!(safety > 0.0 && safety < 1.0)) throw ParameterError("pack_disjoint_balls: safety in (0,1)");
  const double radius = kPackingConstant * safety / std::sqrt(static_cast<double>(k));
  std::vector<GeodesicBall> balls;
  balls.reserve(k);
  for (int i = 0; i < k; ++i) balls.emplace_back(fibonacci_point(i, k), radius);
  const double cos_sep = std::cos(2.0 * radius);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (balls[i].center().coords().dot(balls[j].center().coords()) >= cos_sep) {
        std::ostringstream msg;
        msg << "packing violated for k=" << k << " between balls " << i << " and " << j;
        throw PackingError(msg.str());
      }
    }
  }
  return balls;
}

}  // namespace hopflab
