#include "hopflab/sphere_map.hpp"

#include <sstream>

#include "hopflab/errors.hpp"

namespace hopflab {

SphereMap::SphereMap(Parts parts) {
  if (parts.domain_dim < 1 || parts.domain_dim > 3 || parts.codomain_dim < 1 ||
      parts.codomain_dim > 3) {
    throw DimensionError("SphereMap: dimensions must lie in 1..3");
  }
  if (!parts.eval) throw ParameterError("SphereMap: missing evaluation function");
  impl_ = std::make_shared<const Parts>(std::move(parts));
}

SpherePoint SphereMap::operator()(const SpherePoint& x) const {
  if (x.dim() != domain_dim()) {
    std::ostringstream msg;
    msg << "map expects points of S^" << domain_dim() << ", got S^" << x.dim();
    throw DimensionError(msg.str());
  }
  return SpherePoint::unchecked(eval(x.coords()));
}

Mat SphereMap::jacobian(const Vec& x) const {
  if (impl_->jacobian) return impl_->jacobian(x);
  return finite_difference_jacobian(x);
}

Mat SphereMap::finite_difference_jacobian(const Vec& x, double step) const {
  const Mat frame = tangent_frame(x);
  Mat j = Mat::Zero(codomain_dim() + 1, domain_dim() + 1);
  for (int i = 0; i < domain_dim(); ++i) {
    const Vec t = frame.col(i);
    const Vec plus = eval(exp_map(x, t, step));
    const Vec minus = eval(exp_map(x, t, -step));
    j += ((plus - minus) / (2.0 * step)) * t.transpose();
  }
  return j;
}

nlohmann::json point_to_json(const SpherePoint& x) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < x.ambient(); ++i) arr.push_back(x[i]);
  return arr;
}

SpherePoint point_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DescriptorError("sphere point must be a JSON array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return SpherePoint(v);
}

nlohmann::json ball_to_json(const GeodesicBall& ball) {
  return {{"center", point_to_json(ball.center())}, {"radius", ball.radius()}};
}

GeodesicBall ball_from_json(const nlohmann::json& j) {
  return GeodesicBall(point_from_json(j.at("center")), j.at("radius").get<double>());
}

}  // namespace hopflab
