#include "fracdim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <numbers>
#include <sstream>

namespace fracdim {

std::string_view to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::Henon: return "henon";
    case SystemKind::Ikeda: return "ikeda";
    case SystemKind::Rulkov: return "rulkov";
    case SystemKind::Lorenz: return "lorenz";
    case SystemKind::MackeyGlass: return "mackey_glass";
  }
  return "unknown";
}

std::optional<SystemKind> parse_system_kind(std::string_view name) {
  for (auto k : {SystemKind::Henon, SystemKind::Ikeda, SystemKind::Rulkov, SystemKind::Lorenz,
                 SystemKind::MackeyGlass}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool is_map(SystemKind kind) {
  return kind == SystemKind::Henon || kind == SystemKind::Ikeda || kind == SystemKind::Rulkov;
}

ParamMap default_params(SystemKind kind) {
  switch (kind) {
    case SystemKind::Henon: return {{"a", 1.4}, {"b", 0.3}};
    case SystemKind::Ikeda: return {{"a", 1.0}, {"R", 0.9}, {"phi", 0.4}, {"p", 6.0}};
    case SystemKind::Rulkov: return {{"alpha", 3.75}, {"mu", 1e-4}, {"sigma", -1.0}};
    case SystemKind::Lorenz: return {{"rho", 28.0}, {"sigma", 10.0}, {"beta", 8.0 / 3.0}};
    case SystemKind::MackeyGlass:
      return {{"a", 1.0}, {"b", 2.0}, {"tau", 3.0}, {"n", 10.0}, {"m", 8.0}};
  }
  return {};
}

ParamMap merge_params(SystemKind kind, const ParamMap& overrides) {
  ParamMap params = default_params(kind);
  for (const auto& [name, value] : overrides) {
    auto it = params.find(name);
    if (it == params.end()) {
      throw Error(ErrorKind::InvalidParameter,
                  "unknown parameter '" + name + "' for " + std::string(to_string(kind)));
    }
    it->second = value;
  }
  return params;
}

namespace {

double param(const ParamMap& params, std::string_view name, SystemKind kind) {
  auto it = params.find(name);
  if (it != params.end()) return it->second;
  const auto defaults = default_params(kind);
  auto d = defaults.find(name);
  if (d == defaults.end()) {
    throw Error(ErrorKind::InvalidParameter, "missing parameter " + std::string(name));
  }
  return d->second;
}

struct PlanarMap {
  SystemKind kind;
  double p0 = 0, p1 = 0, p2 = 0, p3 = 0;

  PlanarMap(SystemKind k, const ParamMap& params) : kind(k) {
    switch (kind) {
      case SystemKind::Henon:
        p0 = param(params, "a", kind);
        p1 = param(params, "b", kind);
        break;
      case SystemKind::Ikeda:
        p0 = param(params, "a", kind);
        p1 = param(params, "R", kind);
        p2 = param(params, "phi", kind);
        p3 = param(params, "p", kind);
        break;
      case SystemKind::Rulkov:
        p0 = param(params, "alpha", kind);
        p1 = param(params, "mu", kind);
        p2 = param(params, "sigma", kind);
        break;
      default:
        throw Error(ErrorKind::InvalidArgument, std::string(to_string(kind)) + " is not a map");
    }
  }

  Eigen::Vector2d operator()(const Eigen::Vector2d& s) const {
    const double x = s[0];
    const double y = s[1];
    switch (kind) {
      case SystemKind::Henon: return {1.0 - p0 * x * x + y, p1 * x};
      case SystemKind::Ikeda: {
        const std::complex<double> z(x, y);
        const double phase = p2 - p3 / (1.0 + std::norm(z));
        const std::complex<double> next = p0 + p1 * std::polar(1.0, phase) * z;
        return {next.real(), next.imag()};
      }
      case SystemKind::Rulkov: return {p0 / (1.0 + x * x) + y, y - p1 * (x - p2)};
      default: return s;
    }
  }
};

void check_bounded(const Eigen::Vector2d& s, Index step) {
  if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || std::abs(s[0]) > kDivergenceThreshold ||
      std::abs(s[1]) > kDivergenceThreshold) {
    std::ostringstream msg;
    msg << "orbit escaped at step " << step;
    throw Error(ErrorKind::Divergence, msg.str());
  }
}

}  // namespace

SystemSpec SystemSpec::defaults(SystemKind kind) {
  SystemSpec spec;
  spec.kind = kind;
  spec.params = default_params(kind);
  spec.n_points = 100'000;
  switch (kind) {
    case SystemKind::Henon:
    case SystemKind::Ikeda:
    case SystemKind::Rulkov:
      spec.transient = 1e4;
      spec.sample_interval = 1.0;
      break;
    case SystemKind::Lorenz:
      spec.transient = 1e3;
      spec.sample_interval = 0.1;
      spec.integrator.rel_tol = 1e-9;
      spec.integrator.abs_tol = 1e-9;
      break;
    case SystemKind::MackeyGlass:
      spec.transient = 1e4;
      spec.sample_interval = 3.0 / 7.0;
      spec.integrator.rel_tol = 1e-5;
      spec.integrator.abs_tol = 1e-9;
      break;
  }
  return spec;
}

Eigen::Vector2d map_step(SystemKind kind, const ParamMap& params, const Eigen::Vector2d& x) {
  return PlanarMap(kind, params)(x);
}

PointCloud iterate_map(SystemKind kind, const ParamMap& params, const Eigen::Vector2d& x0, Index n,
                       Index transient) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one iterate");
  if (transient < 0) throw Error(ErrorKind::InvalidArgument, "transient must be nonnegative");
  if (!x0.allFinite()) throw Error(ErrorKind::InvalidArgument, "initial state must be finite");
  const PlanarMap f(kind, params);
  Eigen::Vector2d s = x0;
  Index step = 0;
  for (; step < transient; ++step) {
    s = f(s);
    check_bounded(s, step + 1);
  }
  Points pts(n, 2);
  // Point 0 is the state after exactly `transient` applications.
  for (Index i = 0; i < n; ++i) {
    if (i > 0) {
      s = f(s);
      check_bounded(s, ++step);
    }
    pts.row(i) = s.transpose();
  }
  return PointCloud(std::move(pts), std::string(to_string(kind)));
}

void lorenz_rhs(const ParamMap& params, const Eigen::Vector3d& x, Eigen::Vector3d& dx) {
  const double rho = param(params, "rho", SystemKind::Lorenz);
  const double sigma = param(params, "sigma", SystemKind::Lorenz);
  const double beta = param(params, "beta", SystemKind::Lorenz);
  dx << sigma * (x[1] - x[0]), x[0] * (rho - x[2]) - x[1], x[0] * x[1] - beta * x[2];
}

PointCloud integrate_lorenz(const ParamMap& params, const Eigen::Vector3d& x0, double t_transient,
                            Index n_points, double sample_interval, const IntegratorConfig& cfg) {
  if (n_points < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
  if (!(sample_interval > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "sample interval must be positive");
  }
  if (!(t_transient >= 0.0)) throw Error(ErrorKind::InvalidArgument, "transient must be >= 0");
  const double rho = param(params, "rho", SystemKind::Lorenz);
  const double sigma = param(params, "sigma", SystemKind::Lorenz);
  const double beta = param(params, "beta", SystemKind::Lorenz);
  auto rhs = [=](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx[0] = sigma * (x[1] - x[0]);
    dx[1] = x[0] * (rho - x[2]) - x[1];
    dx[2] = x[0] * x[1] - beta * x[2];
  };
  std::vector<double> times(static_cast<std::size_t>(n_points));
  for (Index k = 0; k < n_points; ++k) {
    times[static_cast<std::size_t>(k)] = t_transient + static_cast<double>(k) * sample_interval;
  }
  // Unbounded steps park the controller on the stability boundary of the
  // stiff direction, where errors hover at the tolerance instead of below it.
  IntegratorConfig capped = cfg;
  capped.max_step = std::min(cfg.max_step, sample_interval);
  const Eigen::MatrixXd samples = integrate_and_sample(rhs, 0.0, x0, times, capped);
  return PointCloud(Points(samples), "lorenz");
}

DelayHistory DelayHistory::constant(double value, double tau) {
  return DelayHistory{-tau, tau, {value, value}};
}

double DelayHistory::operator()(double t) const {
  if (values.size() == 1 || dt <= 0.0) return values.front();
  const double u = (t - t0) / dt;
  if (u <= 0.0) return values.front();
  const auto last = static_cast<double>(values.size() - 1);
  if (u >= last) return values.back();
  const auto i = static_cast<std::size_t>(u);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

PointCloud integrate_mackey_glass(const ParamMap& params, const DelayHistory& history,
                                  double t_transient, Index n_points, const IntegratorConfig& cfg) {
  constexpr auto kind = SystemKind::MackeyGlass;
  const double a = param(params, "a", kind);
  const double b = param(params, "b", kind);
  const double tau = param(params, "tau", kind);
  const double power = param(params, "n", kind);
  const auto m = static_cast<Index>(std::llround(param(params, "m", kind)));
  if (n_points < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
  if (!(tau > 0.0) || m < 2) {
    throw Error(ErrorKind::InvalidParameter, "mackey-glass needs tau > 0 and m >= 2");
  }
  if (history.values.empty() || history.t0 > -tau * (1.0 - 1e-12) || history.end() < 0.0) {
    throw Error(ErrorKind::InvalidHistory, "initial history must cover [-tau, 0]");
  }
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "integrator tolerances must be positive");
  }

  struct Node {
    double t, y, f;
  };
  std::deque<Node> nodes;
  auto delayed = [&](double s) -> double {
    if (s <= 0.0 || nodes.empty()) return history(s);
    auto it = std::upper_bound(nodes.begin(), nodes.end(), s,
                               [](double v, const Node& nd) { return v < nd.t; });
    if (it == nodes.begin()) return history(s);
    if (it == nodes.end()) return nodes.back().y;
    const Node& lo = *(it - 1);
    const Node& hi = *it;
    return hermite(lo.t, lo.y, lo.f, hi.t, hi.y, hi.f, s);
  };
  auto field = [&](double t, double y) {
    const double yd = delayed(t - tau);
    return -a * y + b * yd / (1.0 + std::pow(yd, power));
  };
  auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy[0] = field(t, y[0]); };

  const double spacing = tau / static_cast<double>(m - 1);
  const Index grid_size = n_points + m - 1;
  std::vector<double> grid_values(static_cast<std::size_t>(grid_size));
  const double grid_start = t_transient - tau;
  auto grid_time = [&](Index j) { return grid_start + static_cast<double>(j) * spacing; };
  Index next = 0;
  while (next < grid_size && grid_time(next) <= 0.0) {
    grid_values[static_cast<std::size_t>(next)] = history(grid_time(next));
    ++next;
  }

  double t = 0.0;
  Eigen::VectorXd y(1);
  y[0] = history(0.0);
  nodes.push_back({t, y[0], field(t, y[0])});
  DopriStages stages(1);
  stages.k[0][0] = nodes.back().f;

  const double t_end = grid_time(grid_size - 1);
  double h = std::min({cfg.initial_step > 0.0 ? cfg.initial_step : 1e-3 * tau, tau, cfg.max_step});
  std::int64_t steps = 0;
  while (next < grid_size) {
    const double hh = std::min({h, tau, cfg.max_step, t_end - t});
    if (hh < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      std::ostringstream msg;
      msg << "step size " << hh << " underflowed at t = " << t;
      throw Error(ErrorKind::StepUnderflow, msg.str());
    }
    if (++steps > cfg.max_steps) {
      throw Error(ErrorKind::StepUnderflow, "maximum number of integration steps exceeded");
    }
    const double err = dopri_attempt(rhs, t, y, hh, cfg.rel_tol, cfg.abs_tol, stages);
    const double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
    if (!std::isfinite(err) || err > 1.0) {
      h = hh * std::min(1.0, std::isfinite(err) ? fac : 0.2);
      continue;
    }
    const bool hit_end = hh == t_end - t;
    const double t_new = hit_end ? t_end : t + hh;
    y = stages.y_new;
    if (!std::isfinite(y[0]) || std::abs(y[0]) > kDivergenceThreshold) {
      std::ostringstream msg;
      msg << "solution escaped at t = " << t_new;
      throw Error(ErrorKind::Divergence, msg.str());
    }
    const Node prev = nodes.back();
    nodes.push_back({t_new, y[0], stages.k[6][0]});
    stages.k[0] = stages.k[6];
    t = t_new;
    if (!hit_end) h = hh * fac;

    while (next < grid_size && grid_time(next) <= t) {
      const double g = grid_time(next);
      grid_values[static_cast<std::size_t>(next)] =
          g == t ? y[0] : hermite(prev.t, prev.y, prev.f, t, y[0], nodes.back().f, g);
      ++next;
    }
    while (nodes.size() > 2 && nodes[1].t <= t - tau) nodes.pop_front();
  }

  Points pts(n_points, m);
  for (Index k = 0; k < n_points; ++k) {
    for (Index j = 0; j < m; ++j) {
      pts(k, j) = grid_values[static_cast<std::size_t>(k + m - 1 - j)];
    }
  }
  return PointCloud(std::move(pts), "mackey_glass");
}

InitialCondition random_initial_condition(SystemKind kind, std::uint64_t seed,
                                          const ParamMap& params) {
  Rng rng(seed);
  InitialCondition ic;
  switch (kind) {
    case SystemKind::Henon:
      // Inside Henon's trapping quadrilateral; the upper corners of
      // [-0.5, 0.5]^2 escape.
      ic.state = Eigen::Vector2d(rng.uniform(-0.5, 0.5), rng.uniform(-0.2, 0.2));
      break;
    case SystemKind::Ikeda: {
      const double r = std::sqrt(rng.uniform01());
      const double theta = 2.0 * std::numbers::pi * rng.uniform01();
      ic.state = Eigen::Vector2d(r * std::cos(theta), r * std::sin(theta));
      break;
    }
    case SystemKind::Rulkov:
      ic.state = Eigen::Vector2d(rng.uniform(-1.0, 1.0), -3.5 + rng.uniform(0.0, 0.2));
      break;
    case SystemKind::Lorenz:
      ic.state = Eigen::Vector3d(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10));
      break;
    case SystemKind::MackeyGlass: {
      const double tau = param(params, "tau", kind);
      ic.history = DelayHistory::constant(rng.uniform(0.5, 1.5), tau);
      break;
    }
  }
  return ic;
}

PointCloud generate_trajectory(const SystemSpec& spec, std::uint64_t seed) {
  const ParamMap params = merge_params(spec.kind, spec.params);
  const InitialCondition ic = random_initial_condition(spec.kind, seed, params);
  PointCloud out;
  switch (spec.kind) {
    case SystemKind::Henon:
    case SystemKind::Ikeda:
    case SystemKind::Rulkov:
      out = iterate_map(spec.kind, params, ic.state, spec.n_points,
                        static_cast<Index>(std::llround(spec.transient)));
      break;
    case SystemKind::Lorenz:
      out = integrate_lorenz(params, ic.state, spec.transient, spec.n_points, spec.sample_interval,
                             spec.integrator);
      break;
    case SystemKind::MackeyGlass:
      out = integrate_mackey_glass(params, ic.history, spec.transient, spec.n_points,
                                   spec.integrator);
      break;
  }
  return PointCloud(out.points(), out.label(), seed);
}

}  // namespace fracdim
