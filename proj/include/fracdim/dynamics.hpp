#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fracdim/core.hpp"
#include "fracdim/ode.hpp"

namespace fracdim {

enum class SystemKind { Henon, Ikeda, Rulkov, Lorenz, MackeyGlass };

std::string_view to_string(SystemKind kind);
std::optional<SystemKind> parse_system_kind(std::string_view name);
bool is_map(SystemKind kind);

using ParamMap = std::map<std::string, double, std::less<>>;

/// henon: a, b. ikeda: a, R, phi, p. rulkov: alpha, mu, sigma.
/// lorenz: rho, sigma, beta. mackey_glass: a, b, tau, n, m (projection dim).
ParamMap default_params(SystemKind kind);
/// Defaults overlaid with `overrides`; unknown names are rejected.
ParamMap merge_params(SystemKind kind, const ParamMap& overrides);

struct SystemSpec {
  SystemKind kind = SystemKind::Henon;
  ParamMap params;
  double transient = 0.0;        // steps for maps, time units for flows
  Index n_points = 100'000;
  double sample_interval = 0.1;  // flows only
  IntegratorConfig integrator;

  /// Desk-scale defaults: 1e5 points; transient 1e4 steps (maps), 1e3 time
  /// units (Lorenz) or 1e4 time units (Mackey-Glass).
  static SystemSpec defaults(SystemKind kind);
};

/// Points above this magnitude count as escaped.
inline constexpr double kDivergenceThreshold = 1e10;

/// One application of a planar map. Ikeda states are (Re z, Im z).
Eigen::Vector2d map_step(SystemKind kind, const ParamMap& params, const Eigen::Vector2d& x);

/// Apply the map `transient` times, then record the next n iterates.
/// Throws Divergence naming the step when the orbit escapes.
PointCloud iterate_map(SystemKind kind, const ParamMap& params, const Eigen::Vector2d& x0, Index n,
                       Index transient);

void lorenz_rhs(const ParamMap& params, const Eigen::Vector3d& x, Eigen::Vector3d& dx);

/// Samples at t_transient + k * sample_interval, k = 0..n_points-1.
PointCloud integrate_lorenz(const ParamMap& params, const Eigen::Vector3d& x0, double t_transient,
                            Index n_points, double sample_interval, const IntegratorConfig& cfg);

/// Initial function on [t0, t0 + dt * (values.size() - 1)], linearly
/// interpolated between samples.
struct DelayHistory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;

  static DelayHistory constant(double value, double tau);
  double end() const { return t0 + dt * static_cast<double>(values.size() - 1); }
  double operator()(double t) const;
};

/// Method of steps with Dormand-Prince stages and cubic Hermite lookup of the
/// delayed state. Output point k is (y(t_k), y(t_k - s), ..., y(t_k - (m-1) s))
/// with s = tau / (m - 1) and t_k = t_transient + k s.
/// Throws InvalidHistory when the history does not cover [-tau, 0].
PointCloud integrate_mackey_glass(const ParamMap& params, const DelayHistory& history,
                                  double t_transient, Index n_points, const IntegratorConfig& cfg);

struct InitialCondition {
  Eigen::VectorXd state;  // maps and Lorenz
  DelayHistory history;   // Mackey-Glass
};

/// Uniform draws from fixed per-system boxes inside each basin:
/// henon [-0.5, 0.5] x [-0.2, 0.2], ikeda |z| <= 1, rulkov x in [-1, 1], y in [-3.5, -3.3],
/// lorenz [-10, 10]^3, mackey-glass constant history in [0.5, 1.5].
InitialCondition random_initial_condition(SystemKind kind, std::uint64_t seed,
                                          const ParamMap& params = {});

/// Trajectory from a random initial condition drawn with `seed`.
PointCloud generate_trajectory(const SystemSpec& spec, std::uint64_t seed);

}  // namespace fracdim
