#include <cmath>
#include <numbers>
#include <sstream>

#include "hopflab/energy.hpp"
#include "hopflab/errors.hpp"

namespace hopflab {

namespace {

constexpr double kPi = std::numbers::pi;

// Running mean/M2 for one batch; merged in a fixed order (Chan et al.).
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const auto n = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.count) / n;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }
};

struct Task {
  int stratum;
  std::int64_t batch;
  std::int64_t count;
};

struct Context {
  const SphereMap& u;
  const EnergyParams& params;
  const Region& region;
  std::uint64_t seed;
  std::vector<double> shell_lo{};
  std::vector<double> shell_hi{};
  std::vector<double> shell_measure{};
  // Support sampling.
  const BallSupport* support = nullptr;
  std::vector<double> ball_cumulative{};
  double x_measure = 0.0;
};

bool in_support(const BallSupport& s, const Vec& y) {
  for (const auto& ball : s.balls) {
    if (ball.contains(y)) return true;
  }
  return false;
}

Vec sample_in_ball(const GeodesicBall& ball, Rng& rng) {
  const int n = ball.dim();
  const double psi = sample_polar_angle(n, 0.0, ball.radius(), rng);
  const Vec t = sample_tangent_direction(ball.center().coords(), rng);
  return exp_map(ball.center().coords(), t, psi).normalized();
}

Moments run_batch(const Context& ctx, const Task& task) {
  Rng rng = make_stream(ctx.seed, static_cast<std::uint64_t>(task.stratum),
                        static_cast<std::uint64_t>(task.batch));
  const int n = ctx.params.n;
  const double lo = ctx.shell_lo[task.stratum];
  const double hi = ctx.shell_hi[task.stratum];
  const double weight = ctx.x_measure * ctx.shell_measure[task.stratum];
  const bool whole = ctx.region.kind() == Region::Kind::Whole;
  Moments acc;
  for (std::int64_t i = 0; i < task.count; ++i) {
    Vec x;
    bool x_in_region = true;
    if (ctx.support) {
      const double pick = uniform01(rng) * ctx.ball_cumulative.back();
      std::size_t ball = 0;
      while (ball + 1 < ctx.ball_cumulative.size() && pick >= ctx.ball_cumulative[ball]) ++ball;
      x = sample_in_ball(ctx.support->balls[ball], rng);
      x_in_region = whole || ctx.region.contains(x);
    } else {
      x = ctx.region.sample(rng);
    }
    const double psi = sample_polar_angle(n, lo, hi, rng);
    const Vec t = sample_tangent_direction(x, rng);
    const Vec y = exp_map(x, t, psi).normalized();

    double contribution = 0.0;
    if (x_in_region && (whole || ctx.region.contains(y))) {
      double f = pair_kernel(ctx.u.eval(x), ctx.u.eval(y), x, y, ctx.params);
      if (ctx.support && !in_support(*ctx.support, y)) f *= 2.0;
      contribution = weight * f;
    }
    acc.add(contribution);
  }
  return acc;
}

}  // namespace

void EnergyParams::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw ParameterError("energy: s must lie in (0, 1)");
  if (!(p > 1.0)) throw ParameterError("energy: p must exceed 1");
  if (n < 1 || n > 3) throw DimensionError("energy: n must be 1..3");
  if (critical && std::abs(s * p - n) > 1e-12) {
    throw ParameterError("energy: critical regime requires s * p = n");
  }
}

double pair_kernel(const Vec& ux, const Vec& uy, const Vec& x, const Vec& y,
                   const EnergyParams& params) {
  const double num = (ux - uy).norm();
  if (num == 0.0) return 0.0;
  const double den = (x - y).norm();
  return std::pow(num, params.p) / std::pow(den, params.kernel_exponent());
}

EnergyEstimate energy_mc(const SphereMap& u, const EnergyParams& params, const Region& region,
                         const McOptions& options) {
  params.validate();
  if (u.domain_dim() != params.n) throw DimensionError("energy_mc: map domain differs from n");
  if (region.dim() != params.n) throw DimensionError("energy_mc: region dimension differs from n");
  if (!(region.measure() > 0.0)) throw RegionError("energy_mc: region is empty");
  if (options.samples < kMinMcSamples) {
    std::ostringstream msg;
    msg << "energy_mc: need at least " << kMinMcSamples << " samples, got " << options.samples;
    throw ParameterError(msg.str());
  }
  if (options.strata < 1 || options.strata > 60) throw ParameterError("energy_mc: strata must be 1..60");
  if (options.batch_size < 1) throw ParameterError("energy_mc: batch_size must be positive");

  const int n = params.n;
  const int strata = options.strata;
  Context ctx{.u = u, .params = params, .region = region, .seed = options.seed};
  for (int j = 0; j < strata; ++j) {
    const double hi = kPi * std::ldexp(1.0, -j);
    const double lo = 0.5 * hi;
    ctx.shell_lo.push_back(lo);
    ctx.shell_hi.push_back(hi);
    ctx.shell_measure.push_back(cap_measure(n, hi) - cap_measure(n, lo));
  }

  EnergyEstimate est;
  est.params = params;
  est.region = region;
  est.seed = options.seed;
  est.n_samples = options.samples;

  const auto& support = u.support();
  if (support && support->basepoint.dim() == u.codomain_dim()) {
    ctx.support = &*support;
    est.sampling = "support";
    double total = 0.0;
    for (const auto& ball : support->balls) {
      total += cap_measure(n, ball.radius());
      ctx.ball_cumulative.push_back(total);
    }
    ctx.x_measure = total;
  } else {
    ctx.x_measure = region.measure();
  }

  std::vector<Task> tasks;
  std::vector<std::int64_t> per_stratum(strata, options.samples / strata);
  for (std::int64_t j = 0; j < options.samples % strata; ++j) ++per_stratum[j];
  for (int j = 0; j < strata; ++j) {
    std::int64_t remaining = per_stratum[j];
    for (std::int64_t b = 0; remaining > 0; ++b) {
      const std::int64_t count = std::min(remaining, options.batch_size);
      tasks.push_back({j, b, count});
      remaining -= count;
    }
  }

  std::vector<Moments> results(tasks.size());
  const bool empty_support = ctx.support && ctx.support->balls.empty();
  if (!empty_support) {
    const auto task_count = static_cast<std::int64_t>(tasks.size());
    if (options.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
      for (std::int64_t t = 0; t < task_count; ++t) results[t] = run_batch(ctx, tasks[t]);
    } else {
      for (std::int64_t t = 0; t < task_count; ++t) results[t] = run_batch(ctx, tasks[t]);
    }
  }

  std::vector<Moments> per(strata);
  for (std::size_t t = 0; t < tasks.size(); ++t) per[tasks[t].stratum].merge(results[t]);

  double variance = 0.0;
  for (int j = 0; j < strata; ++j) {
    StratumRecord rec;
    rec.index = j;
    rec.inner_radius = ctx.shell_lo[j];
    rec.outer_radius = ctx.shell_hi[j];
    rec.shell_measure = ctx.shell_measure[j];
    rec.samples = per_stratum[j];
    if (per[j].count > 0) {
      rec.contribution = per[j].mean;
      if (per[j].count > 1) {
        const auto c = static_cast<double>(per[j].count);
        rec.variance = per[j].m2 / (c - 1.0) / c;
      }
    }
    est.value += rec.contribution;
    variance += rec.variance;
    est.strata.push_back(rec);
  }
  est.std_error = std::sqrt(variance);

  if (u.lipschitz_hint()) {
    const double eps = ctx.shell_lo.back();
    const double kappa = std::sin(0.5 * eps) / (0.5 * eps);
    const double gap = params.p - params.s * params.p;
    const double w_max = ctx.support ? 2.0 : 1.0;
    est.remainder_bound = w_max * ctx.x_measure * std::pow(*u.lipschitz_hint(), params.p) *
                          std::pow(kappa, -params.kernel_exponent()) * sphere_measure(n - 1) *
                          std::pow(eps, gap) / gap;
  }
  return est;
}

nlohmann::json to_json(const EnergyEstimate& e) {
  nlohmann::json strata = nlohmann::json::array();
  for (const auto& s : e.strata) {
    strata.push_back({{"index", s.index},
                      {"inner_radius", s.inner_radius},
                      {"outer_radius", s.outer_radius},
                      {"shell_measure", s.shell_measure},
                      {"samples", s.samples},
                      {"contribution", s.contribution},
                      {"variance", s.variance}});
  }
  nlohmann::json j = {{"value", e.value},
                      {"std_error", e.std_error},
                      {"n_samples", e.n_samples},
                      {"s", e.params.s},
                      {"p", e.params.p},
                      {"n", e.params.n},
                      {"region", e.region.to_json()},
                      {"seed", e.seed},
                      {"sampling", e.sampling},
                      {"strata", strata}};
  j["remainder_bound"] = e.remainder_bound ? nlohmann::json(*e.remainder_bound) : nlohmann::json();
  return j;
}

}  // namespace hopflab
