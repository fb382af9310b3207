#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "hopflab/energy.hpp"
#include "hopflab/errors.hpp"
#include "hopflab/random.hpp"
#include "hopflab/topology.hpp"

namespace hopflab {

namespace {

constexpr double kPi = std::numbers::pi;

// Chosen once so that the Hopf map has invariant +1.
constexpr double kFiberOrientation = 1.0;

double frame_determinant(const SphereMap& f, const Vec& x) {
  const Mat j = f.jacobian(x);
  const Mat ed = tangent_frame(x);
  const Mat ec = tangent_frame(f.eval(x));
  return (ec.transpose() * j * ed).determinant();
}

// Quadrature nodes and weights (summing to the measure) covering `ball`.
void ball_nodes(const GeodesicBall& ball, std::int64_t budget, std::vector<Vec>& points,
                std::vector<double>& weights) {
  const int m = ball.dim();
  int radial = 0;
  std::int64_t angular = 0;
  if (m == 1) {
    radial = static_cast<int>(std::max<std::int64_t>(4, budget / 2));
    angular = 2;
  } else if (m == 2) {
    radial = static_cast<int>(std::max(4.0, std::round(std::sqrt(budget / 4.0))));
    angular = std::max<std::int64_t>(8, budget / radial);
  } else {
    radial = static_cast<int>(std::max(4.0, std::round(std::cbrt(static_cast<double>(budget)))));
    angular = std::max<std::int64_t>(16, budget / radial);
  }
  std::vector<double> gx, gw;
  gauss_legendre(radial, gx, gw);
  const Vec c = ball.center().coords();
  const Mat frame = tangent_frame(c);
  const double half = 0.5 * ball.radius();
  const double dir_weight = sphere_measure(m - 1) / static_cast<double>(angular);
  for (int q = 0; q < radial; ++q) {
    const double psi = half * (1.0 + gx[q]);
    const double w = half * gw[q] * std::pow(std::sin(psi), m - 1) * dir_weight;
    for (std::int64_t a = 0; a < angular; ++a) {
      Vec d(m);
      if (m == 1) {
        d[0] = a == 0 ? 1.0 : -1.0;
      } else if (m == 2) {
        const double phi = 2.0 * kPi * (static_cast<double>(a) + 0.5) / static_cast<double>(angular);
        d << std::cos(phi), std::sin(phi);
      } else {
        d = fibonacci_point(a, angular).coords();
      }
      points.push_back(exp_map(c, frame * d, psi).normalized());
      weights.push_back(w);
    }
  }
}

struct Local {
  Vec fx;
  Mat a;   // 2 x 3 differential in tangent frames
  Mat ed;  // 4 x 3
  Mat ec;  // 3 x 2
};

Local local(const SphereMap& f, const Vec& x) {
  Local l;
  l.fx = f.eval(x);
  l.ed = tangent_frame(x);
  l.ec = tangent_frame(l.fx);
  l.a = l.ec.transpose() * f.jacobian(x) * l.ed;
  return l;
}

double smallest_singular_value(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().minCoeff();
}

Vec kernel_direction(const Local& l) {
  const Eigen::Vector3d r0 = l.a.row(0).transpose();
  const Eigen::Vector3d r1 = l.a.row(1).transpose();
  const Eigen::Vector3d k = kFiberOrientation * r0.cross(r1);
  return l.ed * (k / k.norm());
}

// Gauss-Newton onto f^{-1}(target); nullopt when it fails to converge.
std::optional<Vec> correct(const SphereMap& f, const Vec& target, Vec x, double tolerance) {
  for (int it = 0; it < 30; ++it) {
    const Local l = local(f, x);
    const Vec r = l.fx - target;
    if (r.norm() < tolerance) return x;
    const Eigen::Vector2d rf = l.ec.transpose() * r;
    const Eigen::Matrix2d gram = l.a * l.a.transpose();
    if (std::abs(gram.determinant()) < 1e-24) return std::nullopt;
    const Vec delta = -(l.a.transpose() * gram.ldlt().solve(rf));
    if (!delta.allFinite() || delta.norm() > 0.5) return std::nullopt;
    x = (x + l.ed * delta).normalized();
  }
  if ((f.eval(x) - target).norm() < tolerance) return x;
  return std::nullopt;
}

ClosedCurve trace_one(const SphereMap& f, const Vec& target, const Vec& start,
                      const TraceOptions& o) {
  ClosedCurve curve;
  curve.tolerance = 2.0 * o.step;
  curve.points.push_back(start);
  Vec x = start;
  double length = 0.0;
  double h = o.step;
  for (;;) {
    const Local l = local(f, x);
    const double sigma = smallest_singular_value(l.a);
    if (sigma < o.min_singular_value) {
      std::ostringstream msg;
      msg << "trace_fiber: differential degenerates along the fiber (min singular value " << sigma
          << ")";
      throw NonRegularValueError(msg.str());
    }
    const Vec dir = kernel_direction(l);
    std::optional<Vec> next;
    for (;;) {
      const Vec guess = exp_map(x, dir, h).normalized();
      next = correct(f, target, guess, o.corrector_tolerance);
      if (next) {
        const double moved = (*next - x).norm();
        if (moved < 1.5 * h && moved > 0.5 * h && (*next - x).dot(dir) > 0.0) break;
      }
      h *= 0.5;
      if (h < o.step / 1024.0) {
        throw NonRegularValueError("trace_fiber: corrector failed to follow the fiber");
      }
    }
    length += (*next - x).norm();
    x = *next;
    h = std::min(o.step, 2.0 * h);
    const double back = (x - start).norm();
    if (length > 4.0 * o.step && back < 1.5 * o.step) {
      if (back > 0.25 * o.step) curve.points.push_back(x);
      return curve;
    }
    curve.points.push_back(x);
    if (static_cast<std::int64_t>(curve.points.size()) > o.max_points) {
      throw NonRegularValueError("trace_fiber: fiber did not close");
    }
  }
}

double distance_to_curve(const Vec& x, const ClosedCurve& c) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : c.points) best = std::min(best, (p - x).norm());
  return best;
}

bool lexicographically_less(const ClosedCurve& a, const ClosedCurve& b) {
  if (a.points.size() != b.points.size()) return a.points.size() < b.points.size();
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    for (Eigen::Index k = 0; k < a.points[i].size(); ++k) {
      if (a.points[i][k] != b.points[i][k]) return a.points[i][k] < b.points[i][k];
    }
  }
  return a.tolerance < b.tolerance;
}

struct Info {
  int domain = 0;
  int codomain = 0;
  std::int64_t degree = 0;
};

int point_dim(const nlohmann::json& p) { return static_cast<int>(p.size()) - 1; }

Info audit(const Descriptor& d) {
  if (!d.is_object() || !d.contains("type")) {
    throw DescriptorError("descriptor must be an object with a \"type\" field");
  }
  const std::string type = d.at("type").get<std::string>();
  try {
    if (type == "identity") {
      const int m = d.at("dim").get<int>();
      return {m, m, 1};
    }
    if (type == "constant") {
      return {d.at("domain_dim").get<int>(), point_dim(d.at("value")), 0};
    }
    if (type == "rotation") {
      const int m = static_cast<int>(d.at("matrix").size()) - 1;
      return {m, m, 1};
    }
    if (type == "orientation_flip") return {3, 3, -1};
    if (type == "hopf") return {3, 2, 1};
    if (type == "equator_collapse") {
      const int m = d.at("dim").get<int>();
      return {m, m, m % 2 == 1 ? 2 : 0};
    }
    if (type == "bump") {
      const int m = d.at("dim").get<int>();
      return {m, m, 1};
    }
    if (type == "multi_bubble") {
      std::int64_t total = 0;
      for (const auto& bump : d.at("bumps")) {
        const Info b = audit(bump);
        if (b.domain != 2 || b.codomain != 2) throw DescriptorError("multi_bubble: bump is not S^2 -> S^2");
        total += b.degree;
      }
      if (total != d.at("k").get<std::int64_t>()) {
        throw DescriptorError("multi_bubble: bump count disagrees with k");
      }
      return {2, 2, total};
    }
    if (type == "compose") {
      const Info outer = audit(d.at("outer"));
      const Info inner = audit(d.at("inner"));
      if (outer.domain != inner.codomain) throw DescriptorError("compose: dimensions do not chain");
      if (inner.domain == 3 && inner.codomain == 2 && outer.codomain == 2) {
        return {3, 2, outer.degree * outer.degree * inner.degree};
      }
      if (inner.domain == inner.codomain) {
        return {inner.domain, outer.codomain, outer.degree * inner.degree};
      }
      throw DescriptorError("compose: no degree rule for these dimensions");
    }
    if (type == "hopf_bump") {
      const Info inner = audit(d.at("inner"));
      if (inner.domain != 3 || inner.codomain != 3) throw DescriptorError("hopf_bump: inner is not S^3 -> S^3");
      return {3, 2, inner.degree};
    }
    if (type == "patch") {
      Info info{-1, point_dim(d.at("basepoint")), 0};
      if (d.contains("background") && !d.at("background").is_null()) {
        const Info bg = audit(d.at("background"));
        info.domain = bg.domain;
        info.degree += bg.degree;
      }
      for (const auto& piece : d.at("pieces")) {
        const Info p = audit(piece.at("map"));
        if (info.domain >= 0 && p.domain != info.domain) throw DescriptorError("patch: pieces disagree in dimension");
        info.domain = p.domain;
        info.degree += p.degree;
      }
      if (info.domain < 0) info.domain = 3;
      return info;
    }
    if (type == "prescribed_hopf") return audit(d.at("map"));
  } catch (const nlohmann::json::exception& e) {
    throw DescriptorError(std::string("malformed ") + type + " descriptor: " + e.what());
  }
  throw DescriptorError("unknown descriptor variant \"" + type + "\"");
}

}  // namespace

std::string to_string(DegreeMethod m) {
  switch (m) {
    case DegreeMethod::JacobianIntegral:
      return "jacobian-integral";
    case DegreeMethod::Linking:
      return "linking";
    case DegreeMethod::Bookkeeping:
      return "bookkeeping";
  }
  return "unknown";
}

DegreeReport DegreeReport::from_raw(double raw, DegreeMethod method) {
  DegreeReport r;
  r.raw = raw;
  r.value = std::llround(raw);
  r.residual = std::abs(raw - static_cast<double>(r.value));
  r.method = method;
  return r;
}

nlohmann::json to_json(const DegreeReport& r) {
  return {{"value", r.value}, {"raw", r.raw}, {"residual", r.residual}, {"method", to_string(r.method)}};
}

double ClosedCurve::max_gap() const {
  double gap = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    gap = std::max(gap, (points[(i + 1) % points.size()] - points[i]).norm());
  }
  return gap;
}

double ClosedCurve::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += (points[(i + 1) % points.size()] - points[i]).norm();
  }
  return total;
}

nlohmann::json to_json(const ClosedCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < p.size(); ++k) row.push_back(p[k]);
    pts.push_back(row);
  }
  return {{"tolerance", c.tolerance}, {"points", pts}};
}

ClosedCurve curve_from_json(const nlohmann::json& j) {
  ClosedCurve c;
  c.tolerance = j.at("tolerance").get<double>();
  for (const auto& row : j.at("points")) {
    Vec p(static_cast<Eigen::Index>(row.size()));
    for (std::size_t k = 0; k < row.size(); ++k) p[static_cast<Eigen::Index>(k)] = row[k].get<double>();
    c.points.push_back(p);
  }
  return c;
}

void write_plain_text(const ClosedCurve& c, std::ostream& out) {
  const auto old = out.precision(17);
  for (const auto& p : c.points) {
    for (Eigen::Index k = 0; k < p.size(); ++k) out << (k ? " " : "") << p[k];
    out << '\n';
  }
  out.precision(old);
}

DegreeReport mapping_degree(const SphereMap& f, std::int64_t grid_size, Execution execution) {
  if (f.domain_dim() != f.codomain_dim()) {
    throw DimensionError("mapping_degree: map must send S^m to S^m");
  }
  if (grid_size < kMinDegreeGrid) {
    std::ostringstream msg;
    msg << "mapping_degree: grid_size must be at least " << kMinDegreeGrid;
    throw ParameterError(msg.str());
  }
  const int m = f.domain_dim();
  std::vector<Vec> points;
  std::vector<double> weights;
  const auto& support = f.support();
  if (support) {
    if (support->balls.empty()) return DegreeReport::from_raw(0.0, DegreeMethod::JacobianIntegral);
    const auto per_ball = grid_size / static_cast<std::int64_t>(support->balls.size());
    for (const auto& ball : support->balls) ball_nodes(ball, std::max<std::int64_t>(per_ball, 64), points, weights);
  } else {
    const double w = sphere_measure(m) / static_cast<double>(grid_size);
    for (std::int64_t i = 0; i < grid_size; ++i) {
      points.push_back(spiral_point(m, i, grid_size).coords());
      weights.push_back(w);
    }
  }

  const auto count = static_cast<std::int64_t>(points.size());
  std::vector<double> dets(points.size());
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) dets[i] = frame_determinant(f, points[i]);
  } else {
    for (std::int64_t i = 0; i < count; ++i) dets[i] = frame_determinant(f, points[i]);
  }
  double total = 0.0;
  for (std::int64_t i = 0; i < count; ++i) total += weights[i] * dets[i];
  const DegreeReport r = DegreeReport::from_raw(total / sphere_measure(m), DegreeMethod::JacobianIntegral);
  if (r.residual >= 0.5) {
    std::ostringstream msg;
    msg << "mapping_degree: raw value " << r.raw << " is not resolved; increase grid_size beyond "
        << grid_size;
    throw UnresolvedDegreeError(msg.str());
  }
  return r;
}

std::vector<Vec> fiber_seeds(const SphereMap& f, const SpherePoint& target, std::int64_t grid_size,
                             double radius) {
  if (f.domain_dim() != 3 || f.codomain_dim() != 2) {
    throw DimensionError("fiber_seeds: map must send S^3 to S^2");
  }
  std::vector<std::pair<double, Vec>> near;
  const Vec t = target.coords();
  for (std::int64_t i = 0; i < grid_size; ++i) {
    const Vec x = spiral_point(3, i, grid_size).coords();
    const double r = (f.eval(x) - t).norm();
    if (r < radius) near.emplace_back(r, x);
  }
  std::stable_sort(near.begin(), near.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vec> seeds;
  seeds.reserve(near.size());
  for (auto& [r, x] : near) seeds.push_back(std::move(x));
  return seeds;
}

std::vector<ClosedCurve> trace_fiber(const SphereMap& f, const SpherePoint& target,
                                     const std::vector<Vec>& seeds, const TraceOptions& options) {
  if (f.domain_dim() != 3 || f.codomain_dim() != 2) {
    throw DimensionError("trace_fiber: map must send S^3 to S^2");
  }
  if (target.dim() != 2) throw DimensionError("trace_fiber: target must lie on S^2");
  if (!(options.step > 0.0 && options.step < 0.1)) throw ParameterError("trace_fiber: step must lie in (0, 0.1)");
  const Vec t = target.coords();
  std::vector<ClosedCurve> curves;
  for (const auto& seed : seeds) {
    if (seed.size() != 4) throw DimensionError("trace_fiber: seeds must lie in R^4");
    bool known = false;
    for (const auto& c : curves) {
      if (distance_to_curve(seed, c) < 0.02) {
        known = true;
        break;
      }
    }
    if (known) continue;
    const auto start = correct(f, t, seed.normalized(), options.corrector_tolerance);
    if (!start) continue;
    for (const auto& c : curves) {
      if (distance_to_curve(*start, c) < 4.0 * options.step) {
        known = true;
        break;
      }
    }
    if (known) continue;
    curves.push_back(trace_one(f, t, *start, options));
  }
  return curves;
}

DegreeReport gauss_linking(const ClosedCurve& c1, const ClosedCurve& c2, Execution execution) {
  if (c1.points.size() < 3 || c2.points.size() < 3) {
    throw ParameterError("gauss_linking: curves need at least three points");
  }
  const bool swap = lexicographically_less(c2, c1);
  const ClosedCurve& a = swap ? c2 : c1;
  const ClosedCurve& b = swap ? c1 : c2;
  const auto na = static_cast<std::int64_t>(a.points.size());
  const auto nb = static_cast<std::int64_t>(b.points.size());

  double closest = std::numeric_limits<double>::infinity();
  for (const auto& p : a.points) closest = std::min(closest, distance_to_curve(p, b));
  const double limit = 5.0 * std::max(a.tolerance, b.tolerance);
  if (!(closest > limit)) {
    std::ostringstream msg;
    msg << "gauss_linking: curves come within " << closest << " (limit " << limit << ")";
    throw IllConditionedLinkingError(msg.str());
  }

  // Projection pole: the spiral point of S^3 farthest from both curves.
  constexpr std::int64_t kPoleCandidates = 256;
  SpherePoint pole = SpherePoint::basis(3, 3);
  double best = -1.0;
  const std::int64_t stride_a = std::max<std::int64_t>(1, na / 512);
  const std::int64_t stride_b = std::max<std::int64_t>(1, nb / 512);
  for (std::int64_t i = 0; i < kPoleCandidates; ++i) {
    const SpherePoint c = spiral_point(3, i, kPoleCandidates);
    double gap = std::numeric_limits<double>::infinity();
    for (std::int64_t k = 0; k < na; k += stride_a) gap = std::min(gap, (a.points[k] - c.coords()).norm());
    for (std::int64_t k = 0; k < nb; k += stride_b) gap = std::min(gap, (b.points[k] - c.coords()).norm());
    if (gap > best) {
      best = gap;
      pole = c;
    }
  }
  const Rotation rot = rotation_taking(pole, SpherePoint::basis(3, 3));
  auto project = [&rot](const ClosedCurve& c) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(c.points.size());
    for (const auto& p : c.points) {
      out.push_back(stereographic(SpherePoint::normalized(rot.apply(p))));
    }
    return out;
  };
  const auto pa = project(a);
  const auto pb = project(b);
  std::vector<Eigen::Vector3d> ma(na), da(na), mb(nb), db(nb);
  for (std::int64_t i = 0; i < na; ++i) {
    const auto& u = pa[i];
    const auto& v = pa[(i + 1) % na];
    ma[i] = 0.5 * (u + v);
    da[i] = v - u;
  }
  for (std::int64_t j = 0; j < nb; ++j) {
    const auto& u = pb[j];
    const auto& v = pb[(j + 1) % nb];
    mb[j] = 0.5 * (u + v);
    db[j] = v - u;
  }

  std::vector<double> rows(na, 0.0);
  auto row = [&](std::int64_t i) {
    double sum = 0.0;
    for (std::int64_t j = 0; j < nb; ++j) {
      const Eigen::Vector3d r = ma[i] - mb[j];
      const double d = r.norm();
      sum += r.dot(da[i].cross(db[j])) / (d * d * d);
    }
    rows[i] = sum;
  };
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < na; ++i) row(i);
  } else {
    for (std::int64_t i = 0; i < na; ++i) row(i);
  }
  double total = 0.0;
  for (double v : rows) total += v;
  return DegreeReport::from_raw(total / (4.0 * kPi), DegreeMethod::Linking);
}

HopfResult hopf_invariant_detailed(const SphereMap& f, const HopfOptions& options) {
  if (f.domain_dim() != 3 || f.codomain_dim() != 2) {
    throw DimensionError("hopf_invariant: map must send S^3 to S^2");
  }
  Rng rng = make_stream(options.seed, 0x686f7066ULL);
  std::string last_failure = "no attempt made";
  for (int attempt = 1; attempt <= options.retries; ++attempt) {
    const SpherePoint t1 = sample_uniform(2, rng);
    const SpherePoint t2 = sample_uniform(2, rng);
    if (geodesic_distance(t1, t2) < 0.3) {
      last_failure = "targets too close";
      continue;
    }
    try {
      HopfResult out;
      out.target1 = t1;
      out.target2 = t2;
      out.attempts = attempt;
      out.fiber1 = trace_fiber(f, t1, fiber_seeds(f, t1, options.seed_grid), options.trace);
      out.fiber2 = trace_fiber(f, t2, fiber_seeds(f, t2, options.seed_grid), options.trace);
      double raw = 0.0;
      for (const auto& c1 : out.fiber1) {
        for (const auto& c2 : out.fiber2) raw += gauss_linking(c1, c2, options.execution).raw;
      }
      out.report = DegreeReport::from_raw(raw, DegreeMethod::Linking);
      if (out.report.residual >= 0.5) {
        last_failure = "linking sum is not resolved";
        continue;
      }
      return out;
    } catch (const NonRegularValueError& e) {
      last_failure = e.what();
    } catch (const IllConditionedLinkingError& e) {
      last_failure = e.what();
    }
  }
  std::ostringstream msg;
  msg << "hopf_invariant: no usable pair of regular values after " << options.retries
      << " attempts; last failure: " << last_failure;
  throw NonRegularValueError(msg.str());
}

DegreeReport hopf_invariant(const SphereMap& f, const HopfOptions& options) {
  return hopf_invariant_detailed(f, options).report;
}

DegreeReport bookkept_degree(const Descriptor& descriptor) {
  DegreeReport r;
  r.value = audit(descriptor).degree;
  r.raw = static_cast<double>(r.value);
  r.residual = 0.0;
  r.method = DegreeMethod::Bookkeeping;
  return r;
}

}  // namespace hopflab
