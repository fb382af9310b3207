#pragma once

// The explicit maps of the degree-d construction: the Hopf map, the equator
// collapse, degree-one bumps, multi-bubbles, Hopf bumps, compositions with the
// Hopf map, patching, and the map of prescribed Hopf degree.

#include <cstdint>
#include <optional>
#include <vector>

#include "hopflab/random.hpp"
#include "hopflab/sphere.hpp"
#include "hopflab/sphere_map.hpp"

namespace hopflab {

SphereMap identity_map(int m);
SphereMap constant_map(int domain_dim, const SpherePoint& value);
SphereMap rotation_map(const Rotation& rotation);

// x -> (-x1, x2, x3, x4) on S^3; orientation reversing.
SphereMap orientation_flip();

// h(w, z) = (|w|^2 - |z|^2, 2 w conj(z)) with S^3 ⊂ C^2 and S^2 ⊂ R x C.
SphereMap hopf_map();

// Point of the fiber h^{-1}(z) at phase theta. The fiber is the unit great
// circle theta -> (e^{i theta} w, e^{i theta} z0) through a reference preimage.
SpherePoint hopf_fiber_point(const SpherePoint& z, double theta);

// g(x) = (-2 x_1 x_{m+1}, ..., -2 x_m x_{m+1}, 1 - 2 x_{m+1}^2).
SphereMap equator_collapse(int m);

// Geodesic radius of the support of a bump with stereographic radius r.
inline double bump_support_radius(double r) { return 2.0 * std::atan(r); }

// Degree-one map S^m -> S^m equal to b outside B(x0, 2 atan r):
//   R_cod ∘ g ∘ Π^{-1} ∘ (y -> y/r) ∘ Π ∘ R_dom
// with R_dom taking x0 to the south pole and R_cod the north pole to b.
SphereMap bump_deg1(const SpherePoint& x0, double r, const SpherePoint& b);

// Degree-k map S^2 -> S^2: one bump per ball of pack_disjoint_balls(k).
SphereMap multi_bubble(int k, const SpherePoint& b, double safety = 0.9);

SphereMap compose(const SphereMap& outer, const SphereMap& inner);

// v ∘ h for v : S^2 -> S^2.
SphereMap composed_with_hopf(const SphereMap& v);

// h ∘ f_{x0,r} with f valued b' outside its ball, where b' is the
// reference preimage hopf_fiber_point(b, 0) of b. Hopf degree one.
SphereMap hopf_bump(const SpherePoint& x0, double r, const SpherePoint& b);

struct PatchPiece {
  SphereMap map;
  GeodesicBall support;
};

// Pointwise patch: piece i on its support ball, `background` (or the constant
// b when absent) elsewhere. Supports must be pairwise disjoint, each piece
// must equal b off its support, and the background must equal b on every
// support; the latter two are checked on sample points.
SphereMap patch_maps(const std::vector<PatchPiece>& pieces, const SpherePoint& b,
                     const std::optional<SphereMap>& background = std::nullopt);

struct PrescribedOptions {
  SpherePoint basepoint = SpherePoint::basis(2, 0);
  double safety = 0.9;
  int clearance_candidates = 4096;
  double max_bump_radius = 0.3;
};

// Map S^3 -> S^2 of Hopf degree d. For d > 0 with k = floor(sqrt d): the base
// multi_bubble(k, b) ∘ h, plus d - k^2 Hopf bumps placed along the fiber over
// the point of S^2 farthest from the bubbles. d < 0 precomposes |d| with the
// orientation flip.
SphereMap prescribed_hopf_map(std::int64_t d, const PrescribedOptions& options = {});

// Max of |u(x) - u(y)| / |x - y| over n random pairs at geodesic separation
// 1e-4. A lower bound for the Lipschitz constant.
double lipschitz_probe(const SphereMap& u, int n, Rng& rng);

// Rebuilds a map from its descriptor.
SphereMap from_descriptor(const Descriptor& descriptor);

}  // namespace hopflab
