#include <cmath>
#include <numbers>
#include <sstream>

#include "hopflab/energy.hpp"
#include "hopflab/errors.hpp"

namespace hopflab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Layout {
  std::int64_t outer;
  std::int64_t angular;
  int nodes;
  int intervals;  // dyadic intervals plus the innermost [0, pi 2^{-J}]
};

Layout layout_for(int n, const QuadratureOptions& o) {
  const std::int64_t r = o.resolution;
  Layout l;
  l.outer = 128 * r;
  l.angular = n == 3 ? 32 * r : (n == 2 ? 8 * r : 2);
  l.nodes = 2 + o.resolution;
  l.intervals = o.radial_intervals + 1;
  return l;
}

// Unit tangent directions at x expressed in the frame: Fibonacci directions
// on S^2 (n = 3) or equispaced angles on S^1 (n = 2), twisted by `offset`
// so neighbouring outer points do not share a grid.
Vec direction(int n, std::int64_t a, std::int64_t count, double offset) {
  Vec d(n);
  if (n == 1) {
    d[0] = a == 0 ? 1.0 : -1.0;
  } else if (n == 2) {
    const double phi = 2.0 * kPi * (static_cast<double>(a) + 0.5) / static_cast<double>(count) + offset;
    d << std::cos(phi), std::sin(phi);
  } else {
    const SpherePoint f = fibonacci_point(a, count);
    const double c = std::cos(offset);
    const double s = std::sin(offset);
    d << c * f[0] - s * f[1], s * f[0] + c * f[1], f[2];
  }
  return d;
}

}  // namespace

void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  if (q < 1) throw ParameterError("gauss_legendre: q must be positive");
  nodes.assign(q, 0.0);
  weights.assign(q, 0.0);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[q - 1 - i] = x;
    weights[i] = weights[q - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

std::int64_t quadrature_pairs(int n, const QuadratureOptions& options) {
  const Layout l = layout_for(n, options);
  return l.outer * l.angular * l.nodes * l.intervals;
}

double energy_quadrature(const SphereMap& u, const EnergyParams& params,
                         const QuadratureOptions& options) {
  params.validate();
  if (u.domain_dim() != params.n) throw DimensionError("energy_quadrature: map domain differs from n");
  if (options.resolution < 1) throw ParameterError("energy_quadrature: resolution must be positive");
  const int n = params.n;
  const std::int64_t pairs = quadrature_pairs(n, options);
  if (pairs > options.pair_budget) {
    std::ostringstream msg;
    msg << "energy_quadrature: " << pairs << " pairs exceed the budget of " << options.pair_budget;
    throw BudgetError(msg.str());
  }
  const Layout l = layout_for(n, options);

  std::vector<double> gl_x, gl_w;
  gauss_legendre(l.nodes, gl_x, gl_w);
  std::vector<double> psi, radial_w;
  for (int j = 0; j < l.intervals; ++j) {
    const double hi = kPi * std::ldexp(1.0, -j);
    const double lo = j + 1 == l.intervals ? 0.0 : 0.5 * hi;
    for (int q = 0; q < l.nodes; ++q) {
      const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl_x[q];
      psi.push_back(t);
      radial_w.push_back(0.5 * (hi - lo) * gl_w[q] * std::pow(std::sin(t), n - 1));
    }
  }

  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<double> partial(l.outer, 0.0);
  auto outer_point = [&](std::int64_t i) {
    const Vec x = spiral_point(n, i, l.outer).coords();
    const Mat frame = tangent_frame(x);
    const Vec ux = u.eval(x);
    const double offset = golden_angle * static_cast<double>(i);
    double sum = 0.0;
    for (std::int64_t a = 0; a < l.angular; ++a) {
      const Vec t = frame * direction(n, a, l.angular, offset);
      double ray = 0.0;
      for (std::size_t r = 0; r < psi.size(); ++r) {
        const Vec y = exp_map(x, t, psi[r]).normalized();
        ray += radial_w[r] * pair_kernel(ux, u.eval(y), x, y, params);
      }
      sum += ray;
    }
    partial[i] = sum;
  };
  if (options.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < l.outer; ++i) outer_point(i);
  } else {
    for (std::int64_t i = 0; i < l.outer; ++i) outer_point(i);
  }

  double total = 0.0;
  for (double v : partial) total += v;
  const double angular_weight = sphere_measure(n - 1) / static_cast<double>(l.angular);
  return total * angular_weight * sphere_measure(n) / static_cast<double>(l.outer);
}

}  // namespace hopflab
