#include <cmath>

#include "hopflab/energy.hpp"
#include "hopflab/errors.hpp"

namespace hopflab {

Region::Region(Kind kind, int dim, std::optional<GeodesicBall> outer,
               std::optional<GeodesicBall> inner)
    : kind_(kind), dim_(dim), outer_(std::move(outer)), inner_(std::move(inner)) {
  if (dim_ < 1 || dim_ > 3) throw DimensionError("region: dimension must be 1..3");
  switch (kind_) {
    case Kind::Whole:
      measure_ = sphere_measure(dim_);
      break;
    case Kind::Ball:
      measure_ = cap_measure(dim_, outer_->radius());
      break;
    case Kind::Complement:
      measure_ = sphere_measure(dim_) - cap_measure(dim_, inner_->radius());
      break;
    case Kind::Difference: {
      if (outer_->dim() != inner_->dim()) throw DimensionError("region: ball dimensions differ");
      const double gap = geodesic_distance(outer_->center(), inner_->center());
      if (gap + inner_->radius() <= outer_->radius() + 1e-12) {
        measure_ = cap_measure(dim_, outer_->radius()) - cap_measure(dim_, inner_->radius());
      } else if (gap >= outer_->radius() + inner_->radius()) {
        measure_ = cap_measure(dim_, outer_->radius());
      } else {
        throw RegionError("region: difference of partially overlapping balls is unsupported");
      }
      break;
    }
  }
  if (!(measure_ > 0.0)) throw RegionError("region is empty");
}

Region Region::whole(int n) { return Region(Kind::Whole, n, std::nullopt, std::nullopt); }

Region Region::ball(const GeodesicBall& ball) {
  return Region(Kind::Ball, ball.dim(), ball, std::nullopt);
}

Region Region::complement(const GeodesicBall& ball) {
  return Region(Kind::Complement, ball.dim(), std::nullopt, ball);
}

Region Region::difference(const GeodesicBall& outer, const GeodesicBall& inner) {
  return Region(Kind::Difference, outer.dim(), outer, inner);
}

bool Region::contains(const Vec& x) const {
  switch (kind_) {
    case Kind::Whole:
      return true;
    case Kind::Ball:
      return outer_->contains(x);
    case Kind::Complement:
      return !inner_->contains(x);
    case Kind::Difference:
      return outer_->contains(x) && !inner_->contains(x);
  }
  return false;
}

Vec Region::sample(Rng& rng) const {
  auto in_ball = [&rng](const GeodesicBall& ball) {
    const double psi = sample_polar_angle(ball.dim(), 0.0, ball.radius(), rng);
    const Vec t = sample_tangent_direction(ball.center().coords(), rng);
    return Vec(exp_map(ball.center().coords(), t, psi).normalized());
  };
  switch (kind_) {
    case Kind::Whole:
      return sample_uniform(dim_, rng).coords();
    case Kind::Ball:
      return in_ball(*outer_);
    case Kind::Complement:
      for (;;) {
        Vec x = sample_uniform(dim_, rng).coords();
        if (!inner_->contains(x)) return x;
      }
    case Kind::Difference:
      for (;;) {
        Vec x = in_ball(*outer_);
        if (!inner_->contains(x)) return x;
      }
  }
  return {};
}

nlohmann::json Region::to_json() const {
  switch (kind_) {
    case Kind::Whole:
      return {{"kind", "whole"}, {"dim", dim_}};
    case Kind::Ball:
      return {{"kind", "ball"}, {"ball", ball_to_json(*outer_)}};
    case Kind::Complement:
      return {{"kind", "complement"}, {"ball", ball_to_json(*inner_)}};
    case Kind::Difference:
      return {{"kind", "difference"}, {"outer", ball_to_json(*outer_)}, {"inner", ball_to_json(*inner_)}};
  }
  return {};
}

Region Region::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "whole") return whole(j.at("dim").get<int>());
  if (kind == "ball") return ball(ball_from_json(j.at("ball")));
  if (kind == "complement") return complement(ball_from_json(j.at("ball")));
  if (kind == "difference") {
    return difference(ball_from_json(j.at("outer")), ball_from_json(j.at("inner")));
  }
  throw RegionError("unknown region kind \"" + kind + "\"");
}

}  // namespace hopflab
