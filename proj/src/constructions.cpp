#include "hopflab/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hopflab/errors.hpp"

namespace hopflab {

namespace {

constexpr double kPi = std::numbers::pi;

// Lipschitz constant of h for the geodesic metrics: the differential has
// singular values (2, 2, 0).
constexpr double kHopfLipschitz = 2.0;

Vec hopf_eval(const Vec& x) {
  Vec out(3);
  out << x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3],
      2.0 * (x[0] * x[2] + x[1] * x[3]), 2.0 * (x[1] * x[2] - x[0] * x[3]);
  return out;
}

Mat hopf_ambient_jacobian(const Vec& x) {
  Mat j(3, 4);
  j << 2 * x[0], 2 * x[1], -2 * x[2], -2 * x[3],  //
      2 * x[2], 2 * x[3], 2 * x[0], 2 * x[1],     //
      -2 * x[3], 2 * x[2], 2 * x[1], -2 * x[0];
  return j;
}

Vec collapse_eval(const Vec& x) {
  const auto m = x.size() - 1;
  Vec out(m + 1);
  const double last = x[m];
  out.head(m) = (-2.0 * last) * x.head(m);
  out[m] = 1.0 - 2.0 * last * last;
  return out;
}

Mat collapse_ambient_jacobian(const Vec& x) {
  const auto m = x.size() - 1;
  const double last = x[m];
  Mat j = Mat::Zero(m + 1, m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    j(i, i) = -2.0 * last;
    j(i, m) = -2.0 * x[i];
  }
  j(m, m) = -4.0 * last;
  return j;
}

// Projection from the north pole for points away from it.
Vec stereo(const Vec& x) { return stereographic(SpherePoint::unchecked(x)); }

Mat stereo_jacobian(const Vec& x) {
  const auto m = x.size() - 1;
  const double denom = 1.0 - x[m];
  Mat j = Mat::Zero(m, m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    j(i, i) = 1.0 / denom;
    j(i, m) = x[i] / (denom * denom);
  }
  return j;
}

Mat stereo_inv_jacobian(const Vec& y) {
  const auto m = y.size();
  const double q = y.squaredNorm();
  const double a = 1.0 + q;
  Mat j(m + 1, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < m; ++k) {
      j(i, k) = (i == k ? 2.0 / a : 0.0) - 4.0 * y[i] * y[k] / (a * a);
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) j(m, k) = 4.0 * y[k] / (a * a);
  return j;
}

void require_dim(const SpherePoint& x, int m, const char* what) {
  if (x.dim() != m) {
    std::ostringstream msg;
    msg << what << ": expected a point of S^" << m << ", got S^" << x.dim();
    throw DimensionError(msg.str());
  }
}

std::optional<std::int64_t> composed_degree(const SphereMap& outer, const SphereMap& inner) {
  const auto& dout = outer.bookkept_degree();
  const auto& din = inner.bookkept_degree();
  if (!dout || !din) return std::nullopt;
  if (inner.domain_dim() == 3 && inner.codomain_dim() == 2 && outer.domain_dim() == 2 &&
      outer.codomain_dim() == 2) {
    return (*dout) * (*dout) * (*din);  // deg_H(v ∘ w) = (deg v)^2 deg_H(w)
  }
  if (inner.domain_dim() == 3 && inner.codomain_dim() == 3 && outer.codomain_dim() == 2) {
    return (*dout) * (*din);  // deg_H(w ∘ f) = deg_H(w) deg(f)
  }
  if (inner.domain_dim() == inner.codomain_dim() && outer.domain_dim() == outer.codomain_dim()) {
    return (*dout) * (*din);
  }
  return std::nullopt;
}

// Sample checks behind patch_maps' preconditions.
constexpr std::uint64_t kPatchCheckSeed = 0x5eed'0f'7a7c4ULL;
constexpr int kPatchCheckSamples = 256;

void check_constant_outside(const SphereMap& piece, const GeodesicBall& support,
                            const Vec& b, std::size_t index) {
  Rng rng = make_stream(kPatchCheckSeed, 1, index);
  const int n = piece.domain_dim();
  const double outer = std::min(support.radius() + 0.2, kPi);
  for (int i = 0; i < 2 * kPatchCheckSamples; ++i) {
    Vec y;
    if (i < kPatchCheckSamples) {
      y = sample_uniform(n, rng).coords();
    } else {
      const double psi = sample_polar_angle(n, support.radius(), outer, rng);
      const Vec t = sample_tangent_direction(support.center().coords(), rng);
      y = exp_map(support.center().coords(), t, psi).normalized();
    }
    if (support.contains(y)) continue;
    if (piece.eval(y) != b) {
      std::ostringstream msg;
      msg << "patch piece " << index << " is not constant outside its support";
      throw PatchError(msg.str());
    }
  }
}

void check_background_constant(const SphereMap& background, const GeodesicBall& support,
                               const Vec& b, std::size_t index) {
  Rng rng = make_stream(kPatchCheckSeed, 2, index);
  const int n = background.domain_dim();
  for (int i = 0; i < kPatchCheckSamples; ++i) {
    const double psi = sample_polar_angle(n, 0.0, support.radius(), rng);
    const Vec t = sample_tangent_direction(support.center().coords(), rng);
    const Vec y = exp_map(support.center().coords(), t, psi).normalized();
    if (background.eval(y) != b) {
      std::ostringstream msg;
      msg << "patch background is not equal to the basepoint on support " << index;
      throw PatchError(msg.str());
    }
  }
}

}  // namespace

SphereMap identity_map(int m) {
  return SphereMap({.domain_dim = m,
                    .codomain_dim = m,
                    .eval = [](const Vec& x) { return x; },
                    .jacobian = [](const Vec& x) { return tangent_projector(x); },
                    .descriptor = {{"type", "identity"}, {"dim", m}},
                    .lipschitz_hint = 1.0,
                    .support = std::nullopt,
                    .bookkept_degree = 1});
}

SphereMap constant_map(int domain_dim, const SpherePoint& value) {
  const Vec v = value.coords();
  const int l = value.dim();
  return SphereMap({.domain_dim = domain_dim,
                    .codomain_dim = l,
                    .eval = [v](const Vec&) { return v; },
                    .jacobian = [l, domain_dim](const Vec&) {
                      return Mat(Mat::Zero(l + 1, domain_dim + 1));
                    },
                    .descriptor = {{"type", "constant"},
                                   {"domain_dim", domain_dim},
                                   {"value", point_to_json(value)}},
                    .lipschitz_hint = 0.0,
                    .support = BallSupport{{}, value},
                    .bookkept_degree = 0});
}

SphereMap rotation_map(const Rotation& rotation) {
  const Mat r = rotation.matrix();
  const int m = rotation.dim();
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < r.cols(); ++j) row.push_back(r(i, j));
    rows.push_back(row);
  }
  return SphereMap({.domain_dim = m,
                    .codomain_dim = m,
                    .eval = [r](const Vec& x) { return Vec(r * x); },
                    .jacobian = [r](const Vec& x) { return Mat(r * tangent_projector(x)); },
                    .descriptor = {{"type", "rotation"}, {"matrix", rows}},
                    .lipschitz_hint = 1.0,
                    .support = std::nullopt,
                    .bookkept_degree = 1});
}

SphereMap orientation_flip() {
  return SphereMap({.domain_dim = 3,
                    .codomain_dim = 3,
                    .eval =
                        [](const Vec& x) {
                          Vec y = x;
                          y[0] = -y[0];
                          return y;
                        },
                    .jacobian =
                        [](const Vec& x) {
                          Mat flip = Mat::Identity(4, 4);
                          flip(0, 0) = -1.0;
                          return Mat(flip * tangent_projector(x));
                        },
                    .descriptor = {{"type", "orientation_flip"}},
                    .lipschitz_hint = 1.0,
                    .support = std::nullopt,
                    .bookkept_degree = -1});
}

SphereMap hopf_map() {
  return SphereMap({.domain_dim = 3,
                    .codomain_dim = 2,
                    .eval = hopf_eval,
                    .jacobian =
                        [](const Vec& x) {
                          return Mat(hopf_ambient_jacobian(x) * tangent_projector(x));
                        },
                    .descriptor = {{"type", "hopf"}},
                    .lipschitz_hint = kHopfLipschitz,
                    .support = std::nullopt,
                    .bookkept_degree = 1});
}

SpherePoint hopf_fiber_point(const SpherePoint& z, double theta) {
  require_dim(z, 2, "hopf_fiber_point");
  // Reference preimage (w, z0) with 2 w conj(z0) = c := z2 + i z3. Solve for
  // the larger of |w|, |z0| first to stay well conditioned.
  const double z1 = z[0];
  const double cr = z[1];
  const double ci = z[2];
  double wr, wi, zr, zi;
  if (z1 >= 0.0) {
    wr = std::sqrt(0.5 * (1.0 + z1));
    wi = 0.0;
    // z0 = conj(c) / (2 w)
    zr = cr / (2.0 * wr);
    zi = -ci / (2.0 * wr);
  } else {
    zr = std::sqrt(0.5 * (1.0 - z1));
    zi = 0.0;
    // w = c / (2 z0)
    wr = cr / (2.0 * zr);
    wi = ci / (2.0 * zr);
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Vec x(4);
  x << c * wr - s * wi, s * wr + c * wi, c * zr - s * zi, s * zr + c * zi;
  return SpherePoint::unchecked(x / x.norm());
}

SphereMap equator_collapse(int m) {
  if (m < 1 || m > 3) throw DimensionError("equator_collapse: m must be 1..3");
  // The two hemispheres each cover the sphere once; the antipodal map relates
  // them, so the degree is 1 + (-1)^{m+1}.
  const std::int64_t degree = (m % 2 == 1) ? 2 : 0;
  return SphereMap({.domain_dim = m,
                    .codomain_dim = m,
                    .eval = collapse_eval,
                    .jacobian =
                        [](const Vec& x) {
                          return Mat(collapse_ambient_jacobian(x) * tangent_projector(x));
                        },
                    .descriptor = {{"type", "equator_collapse"}, {"dim", m}},
                    .lipschitz_hint = 2.0,
                    .support = std::nullopt,
                    .bookkept_degree = degree});
}

SphereMap bump_deg1(const SpherePoint& x0, double r, const SpherePoint& b) {
  if (!(r > 0.0 && r < 1.0)) throw ParameterError("bump_deg1: r must lie in (0, 1)");
  if (x0.dim() != b.dim()) throw DimensionError("bump_deg1: center and basepoint dimensions differ");
  const int m = x0.dim();
  const GeodesicBall support(x0, bump_support_radius(r));
  const Mat r_dom = rotation_taking(x0, SpherePoint::south_pole(m)).matrix();
  const Mat r_cod = rotation_taking(SpherePoint::north_pole(m), b).matrix();
  const Vec bv = b.coords();
  const double inv_r = 1.0 / r;

  auto eval = [support, r_dom, r_cod, bv, inv_r](const Vec& x) -> Vec {
    if (!support.contains(x)) return bv;
    const Vec y = stereo(r_dom * x) * inv_r;
    return r_cod * collapse_eval(stereographic_inv(y).coords());
  };
  auto jacobian = [support, r_dom, r_cod, inv_r](const Vec& x) -> Mat {
    const auto dim = x.size();
    if (!support.contains(x)) return Mat::Zero(dim, dim);
    const Vec x1 = r_dom * x;
    const Vec y = stereo(x1) * inv_r;
    const Vec z = stereographic_inv(y).coords();
    const Mat chain = r_cod * collapse_ambient_jacobian(z) * stereo_inv_jacobian(y) *
                      (inv_r * stereo_jacobian(x1)) * r_dom;
    return chain * tangent_projector(x);
  };

  return SphereMap({.domain_dim = m,
                    .codomain_dim = m,
                    .eval = eval,
                    .jacobian = jacobian,
                    .descriptor = {{"type", "bump"},
                                   {"dim", m},
                                   {"center", point_to_json(x0)},
                                   {"r", r},
                                   {"basepoint", point_to_json(b)},
                                   {"support_radius", support.radius()}},
                    // The Möbius dilation stretches by at most 1/r, g by 2.
                    .lipschitz_hint = 2.0 * inv_r,
                    .support = BallSupport{{support}, b},
                    .bookkept_degree = 1});
}

namespace {

SphereMap assemble_multi_bubble(int k, double safety, const SpherePoint& b,
                                std::vector<SphereMap> bumps) {
  std::vector<GeodesicBall> balls;
  nlohmann::json bump_desc = nlohmann::json::array();
  double lipschitz = 0.0;
  for (const auto& bump : bumps) {
    balls.push_back(bump.support()->balls.front());
    bump_desc.push_back(bump.descriptor());
    lipschitz = std::max(lipschitz, *bump.lipschitz_hint());
  }
  const Vec bv = b.coords();
  auto eval = [bumps, balls, bv](const Vec& x) -> Vec {
    for (std::size_t i = 0; i < balls.size(); ++i) {
      if (balls[i].contains(x)) return bumps[i].eval(x);
    }
    return bv;
  };
  auto jacobian = [bumps, balls](const Vec& x) -> Mat {
    for (std::size_t i = 0; i < balls.size(); ++i) {
      if (balls[i].contains(x)) return bumps[i].jacobian(x);
    }
    return Mat::Zero(x.size(), x.size());
  };
  const auto degree = static_cast<std::int64_t>(bumps.size());
  return SphereMap({.domain_dim = 2,
                    .codomain_dim = 2,
                    .eval = eval,
                    .jacobian = jacobian,
                    .descriptor = {{"type", "multi_bubble"},
                                   {"k", k},
                                   {"safety", safety},
                                   {"basepoint", point_to_json(b)},
                                   {"bumps", bump_desc}},
                    .lipschitz_hint = lipschitz,
                    .support = BallSupport{balls, b},
                    .bookkept_degree = degree});
}

}  // namespace

SphereMap multi_bubble(int k, const SpherePoint& b, double safety) {
  require_dim(b, 2, "multi_bubble basepoint");
  const auto balls = pack_disjoint_balls(k, safety);
  std::vector<SphereMap> bumps;
  bumps.reserve(balls.size());
  for (const auto& ball : balls) {
    bumps.push_back(bump_deg1(ball.center(), std::tan(0.5 * ball.radius()), b));
  }
  return assemble_multi_bubble(k, safety, b, std::move(bumps));
}

SphereMap compose(const SphereMap& outer, const SphereMap& inner) {
  if (inner.codomain_dim() != outer.domain_dim()) {
    throw DimensionError("compose: inner codomain does not match outer domain");
  }
  std::optional<double> lipschitz;
  if (outer.lipschitz_hint() && inner.lipschitz_hint()) {
    lipschitz = *outer.lipschitz_hint() * *inner.lipschitz_hint();
  }
  SphereMap::JacobianFn jacobian;
  if (outer.has_analytic_jacobian() && inner.has_analytic_jacobian()) {
    jacobian = [outer, inner](const Vec& x) -> Mat {
      return outer.jacobian(inner.eval(x)) * inner.jacobian(x);
    };
  }
  return SphereMap({.domain_dim = inner.domain_dim(),
                    .codomain_dim = outer.codomain_dim(),
                    .eval = [outer, inner](const Vec& x) { return outer.eval(inner.eval(x)); },
                    .jacobian = jacobian,
                    .descriptor = {{"type", "compose"},
                                   {"outer", outer.descriptor()},
                                   {"inner", inner.descriptor()}},
                    .lipschitz_hint = lipschitz,
                    .support = std::nullopt,
                    .bookkept_degree = composed_degree(outer, inner)});
}

SphereMap composed_with_hopf(const SphereMap& v) {
  if (v.domain_dim() != 2 || v.codomain_dim() != 2) {
    throw DimensionError("composed_with_hopf: v must map S^2 to S^2");
  }
  return compose(v, hopf_map());
}

namespace {

SphereMap assemble_hopf_bump(const SpherePoint& b, const SphereMap& inner) {
  const GeodesicBall support = inner.support()->balls.front();
  const Vec bv = b.coords();
  auto eval = [support, inner, bv](const Vec& x) -> Vec {
    if (!support.contains(x)) return bv;
    return hopf_eval(inner.eval(x));
  };
  auto jacobian = [support, inner](const Vec& x) -> Mat {
    if (!support.contains(x)) return Mat::Zero(3, 4);
    const Vec fx = inner.eval(x);
    return hopf_ambient_jacobian(fx) * tangent_projector(fx) * inner.jacobian(x);
  };
  return SphereMap({.domain_dim = 3,
                    .codomain_dim = 2,
                    .eval = eval,
                    .jacobian = jacobian,
                    .descriptor = {{"type", "hopf_bump"},
                                   {"basepoint", point_to_json(b)},
                                   {"inner", inner.descriptor()}},
                    .lipschitz_hint = kHopfLipschitz * *inner.lipschitz_hint(),
                    .support = BallSupport{{support}, b},
                    .bookkept_degree = *inner.bookkept_degree()});
}

}  // namespace

SphereMap hopf_bump(const SpherePoint& x0, double r, const SpherePoint& b) {
  require_dim(x0, 3, "hopf_bump center");
  require_dim(b, 2, "hopf_bump basepoint");
  const SpherePoint preimage = hopf_fiber_point(b, 0.0);
  return assemble_hopf_bump(b, bump_deg1(x0, r, preimage));
}

SphereMap patch_maps(const std::vector<PatchPiece>& pieces, const SpherePoint& b,
                     const std::optional<SphereMap>& background) {
  const int n = background ? background->domain_dim()
                           : (pieces.empty() ? -1 : pieces.front().map.domain_dim());
  const int l = b.dim();
  for (const auto& piece : pieces) {
    if (piece.map.domain_dim() != n || piece.map.codomain_dim() != l ||
        piece.support.dim() != n) {
      throw DimensionError("patch_maps: pieces disagree in dimension");
    }
  }
  if (background && background->codomain_dim() != l) {
    throw DimensionError("patch_maps: background codomain differs from the basepoint");
  }
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      const double gap = geodesic_distance(pieces[i].support.center(), pieces[j].support.center());
      if (gap < pieces[i].support.radius() + pieces[j].support.radius()) {
        std::ostringstream msg;
        msg << "patch_maps: supports " << i << " and " << j << " overlap";
        throw PatchError(msg.str());
      }
    }
  }
  const Vec bv = b.coords();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    check_constant_outside(pieces[i].map, pieces[i].support, bv, i);
    if (background) check_background_constant(*background, pieces[i].support, bv, i);
  }

  std::vector<SphereMap> maps;
  std::vector<GeodesicBall> balls;
  nlohmann::json piece_desc = nlohmann::json::array();
  std::optional<double> lipschitz = background ? background->lipschitz_hint() : 0.0;
  std::optional<std::int64_t> degree = background ? background->bookkept_degree() : 0;
  for (const auto& piece : pieces) {
    maps.push_back(piece.map);
    balls.push_back(piece.support);
    piece_desc.push_back({{"support", ball_to_json(piece.support)}, {"map", piece.map.descriptor()}});
    if (lipschitz && piece.map.lipschitz_hint()) {
      lipschitz = std::max(*lipschitz, *piece.map.lipschitz_hint());
    } else {
      lipschitz.reset();
    }
    if (degree && piece.map.bookkept_degree()) {
      *degree += *piece.map.bookkept_degree();
    } else {
      degree.reset();
    }
  }

  auto eval = [maps, balls, background, bv](const Vec& x) -> Vec {
    for (std::size_t i = 0; i < balls.size(); ++i) {
      if (balls[i].contains(x)) return maps[i].eval(x);
    }
    return background ? background->eval(x) : bv;
  };
  SphereMap::JacobianFn jacobian;
  const bool analytic =
      (!background || background->has_analytic_jacobian()) &&
      std::all_of(maps.begin(), maps.end(), [](const SphereMap& u) { return u.has_analytic_jacobian(); });
  if (analytic) {
    jacobian = [maps, balls, background, l](const Vec& x) -> Mat {
      for (std::size_t i = 0; i < balls.size(); ++i) {
        if (balls[i].contains(x)) return maps[i].jacobian(x);
      }
      return background ? background->jacobian(x) : Mat(Mat::Zero(l + 1, x.size()));
    };
  }
  std::optional<BallSupport> support;
  if (!background) support = BallSupport{balls, b};

  return SphereMap({.domain_dim = n < 0 ? 3 : n,
                    .codomain_dim = l,
                    .eval = eval,
                    .jacobian = jacobian,
                    .descriptor = {{"type", "patch"},
                                   {"basepoint", point_to_json(b)},
                                   {"background", background ? background->descriptor() : nlohmann::json()},
                                   {"pieces", piece_desc}},
                    .lipschitz_hint = lipschitz,
                    .support = support,
                    .bookkept_degree = degree});
}

namespace {

SphereMap wrap_prescribed(std::int64_t d, const SphereMap& u) {
  return SphereMap({.domain_dim = u.domain_dim(),
                    .codomain_dim = u.codomain_dim(),
                    .eval = [u](const Vec& x) { return u.eval(x); },
                    .jacobian = u.has_analytic_jacobian()
                                    ? SphereMap::JacobianFn([u](const Vec& x) { return u.jacobian(x); })
                                    : SphereMap::JacobianFn(),
                    .descriptor = {{"type", "prescribed_hopf"}, {"d", d}, {"map", u.descriptor()}},
                    .lipschitz_hint = u.lipschitz_hint(),
                    .support = u.support(),
                    .bookkept_degree = u.bookkept_degree()});
}

SphereMap positive_prescribed(std::int64_t d, const PrescribedOptions& options) {
  const SpherePoint& b = options.basepoint;
  auto k = static_cast<std::int64_t>(std::sqrt(static_cast<double>(d)));
  while (k * k > d) --k;
  while ((k + 1) * (k + 1) <= d) ++k;
  const std::int64_t extra = d - k * k;

  std::optional<SphereMap> v;
  if (k > 0) v = multi_bubble(static_cast<int>(k), b, options.safety);
  const SphereMap base = v ? composed_with_hopf(*v) : constant_map(3, b);
  if (extra == 0) return base;

  // Point of S^2 farthest from the bubbles; its Hopf fiber sits inside the
  // open set where the base map equals b.
  SpherePoint target = SpherePoint::basis(2, 2);
  double clearance = kPi;
  if (v) {
    const auto& balls = v->support()->balls;
    clearance = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < options.clearance_candidates; ++i) {
      const SpherePoint c = fibonacci_point(i, options.clearance_candidates);
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& ball : balls) {
        gap = std::min(gap, geodesic_distance(c, ball.center()) - ball.radius());
      }
      if (gap > clearance) {
        clearance = gap;
        target = c;
      }
    }
  }
  if (!(clearance > 0.0)) {
    throw PlacementError("prescribed_hopf_map: no point of S^2 clears the bubbles");
  }
  const double spacing = 2.0 * kPi / static_cast<double>(extra);
  const double radius =
      std::min({spacing / 3.0, clearance / (2.0 * kHopfLipschitz), options.max_bump_radius});

  std::vector<PatchPiece> pieces;
  pieces.reserve(static_cast<std::size_t>(extra));
  for (std::int64_t j = 0; j < extra; ++j) {
    const SpherePoint center = hopf_fiber_point(target, spacing * static_cast<double>(j));
    SphereMap bump = hopf_bump(center, std::tan(0.5 * radius), b);
    GeodesicBall support = bump.support()->balls.front();
    pieces.push_back({std::move(bump), std::move(support)});
  }
  try {
    return patch_maps(pieces, b, base);
  } catch (const PatchError& e) {
    std::ostringstream msg;
    msg << "prescribed_hopf_map(" << d << "): failed to place " << extra
        << " bumps (radius " << radius << ", clearance " << clearance << "): " << e.what();
    throw PlacementError(msg.str());
  }
}

}  // namespace

SphereMap prescribed_hopf_map(std::int64_t d, const PrescribedOptions& options) {
  require_dim(options.basepoint, 2, "prescribed_hopf_map basepoint");
  if (d == 0) return wrap_prescribed(0, constant_map(3, options.basepoint));
  if (d > 0) return wrap_prescribed(d, positive_prescribed(d, options));
  const SphereMap positive = prescribed_hopf_map(-d, options);
  return wrap_prescribed(d, compose(positive, orientation_flip()));
}

double lipschitz_probe(const SphereMap& u, int n, Rng& rng) {
  if (n < 1) throw ParameterError("lipschitz_probe: n must be >= 1");
  constexpr double separation = 1e-4;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec x = sample_uniform(u.domain_dim(), rng).coords();
    const Vec t = sample_tangent_direction(x, rng);
    const Vec y = exp_map(x, t, separation).normalized();
    const double ratio = (u.eval(x) - u.eval(y)).norm() / (x - y).norm();
    best = std::max(best, ratio);
  }
  return best;
}

SphereMap from_descriptor(const Descriptor& desc) {
  if (!desc.is_object() || !desc.contains("type")) {
    throw DescriptorError("descriptor must be an object with a \"type\" field");
  }
  const std::string type = desc.at("type").get<std::string>();
  try {
    if (type == "identity") return identity_map(desc.at("dim").get<int>());
    if (type == "constant") {
      return constant_map(desc.at("domain_dim").get<int>(), point_from_json(desc.at("value")));
    }
    if (type == "rotation") {
      const auto& rows = desc.at("matrix");
      const auto dim = static_cast<Eigen::Index>(rows.size());
      Mat r(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) r(i, j) = rows.at(i).at(j).get<double>();
      }
      return rotation_map(Rotation(r));
    }
    if (type == "orientation_flip") return orientation_flip();
    if (type == "hopf") return hopf_map();
    if (type == "equator_collapse") return equator_collapse(desc.at("dim").get<int>());
    if (type == "bump") {
      return bump_deg1(point_from_json(desc.at("center")), desc.at("r").get<double>(),
                       point_from_json(desc.at("basepoint")));
    }
    if (type == "multi_bubble") {
      std::vector<SphereMap> bumps;
      for (const auto& child : desc.at("bumps")) bumps.push_back(from_descriptor(child));
      return assemble_multi_bubble(desc.at("k").get<int>(), desc.at("safety").get<double>(),
                                   point_from_json(desc.at("basepoint")), std::move(bumps));
    }
    if (type == "compose") {
      return compose(from_descriptor(desc.at("outer")), from_descriptor(desc.at("inner")));
    }
    if (type == "hopf_bump") {
      return assemble_hopf_bump(point_from_json(desc.at("basepoint")),
                                from_descriptor(desc.at("inner")));
    }
    if (type == "patch") {
      std::vector<PatchPiece> pieces;
      for (const auto& p : desc.at("pieces")) {
        pieces.push_back({from_descriptor(p.at("map")), ball_from_json(p.at("support"))});
      }
      std::optional<SphereMap> background;
      if (desc.contains("background") && !desc.at("background").is_null()) {
        background = from_descriptor(desc.at("background"));
      }
      return patch_maps(pieces, point_from_json(desc.at("basepoint")), background);
    }
    if (type == "prescribed_hopf") {
      return wrap_prescribed(desc.at("d").get<std::int64_t>(), from_descriptor(desc.at("map")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DescriptorError(std::string("malformed ") + type + " descriptor: " + e.what());
  }
  throw DescriptorError("unknown descriptor variant \"" + type + "\"");
}

}  // namespace hopflab
