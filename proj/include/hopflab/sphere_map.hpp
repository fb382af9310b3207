#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

#include "hopflab/sphere.hpp"

namespace hopflab {

// Construction record of a map: {"type": <variant>, ...parameters, ...children}.
// Two maps with equal descriptors agree pointwise; from_descriptor() rebuilds
// a map bit-identically.
using Descriptor = nlohmann::json;

// Declares that a map equals `basepoint` everywhere outside the union of
// `balls` (pairwise disjoint). The energy estimator uses this to concentrate
// samples where the map varies.
struct BallSupport {
  std::vector<GeodesicBall> balls;
  SpherePoint basepoint;
};

// An evaluable map S^n -> S^l. Immutable after construction; copies share
// the underlying closure, and evaluation is reentrant.
class SphereMap {
 public:
  using EvalFn = std::function<Vec(const Vec&)>;
  // Ambient differential: an (l+1) x (n+1) matrix J with J x = 0 whose action
  // on tangent vectors at x is Df(x).
  using JacobianFn = std::function<Mat(const Vec&)>;

  struct Parts {
    int domain_dim = 0;
    int codomain_dim = 0;
    EvalFn eval;
    JacobianFn jacobian;  // empty: finite differences
    Descriptor descriptor;
    std::optional<double> lipschitz_hint;
    std::optional<BallSupport> support;
    // Degree (S^m -> S^m) or Hopf degree (S^3 -> S^2) known from construction.
    std::optional<std::int64_t> bookkept_degree;
  };

  explicit SphereMap(Parts parts);

  int domain_dim() const { return impl_->domain_dim; }
  int codomain_dim() const { return impl_->codomain_dim; }

  // Raw evaluation on a unit (domain_dim+1)-vector; no checks.
  Vec eval(const Vec& x) const { return impl_->eval(x); }
  SpherePoint operator()(const SpherePoint& x) const;

  bool has_analytic_jacobian() const { return static_cast<bool>(impl_->jacobian); }
  Mat jacobian(const Vec& x) const;
  // Central differences along geodesics in a tangent frame.
  Mat finite_difference_jacobian(const Vec& x, double step = 1e-6) const;

  const Descriptor& descriptor() const { return impl_->descriptor; }
  const std::optional<double>& lipschitz_hint() const { return impl_->lipschitz_hint; }
  const std::optional<BallSupport>& support() const { return impl_->support; }
  const std::optional<std::int64_t>& bookkept_degree() const { return impl_->bookkept_degree; }

 private:
  std::shared_ptr<const Parts> impl_;
};

nlohmann::json point_to_json(const SpherePoint& x);
SpherePoint point_from_json(const nlohmann::json& j);
nlohmann::json ball_to_json(const GeodesicBall& ball);
GeodesicBall ball_from_json(const nlohmann::json& j);

}  // namespace hopflab
