#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracdim/dynamics.hpp"
#include "fracdim/ode.hpp"

using namespace fracdim;

namespace {

const auto kOscillator = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
  dy[0] = y[1];
  dy[1] = -y[0];
};

// Fixed-step Dormand-Prince over [0, T]; returns |x(T) - cos T|.
double fixed_step_error(double h, double T) {
  DopriStages s(2);
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  kOscillator(0.0, y, s.k[0]);
  const int steps = static_cast<int>(std::lround(T / h));
  double t = 0.0;
  for (int i = 0; i < steps; ++i) {
    dopri_attempt(kOscillator, t, y, h, 1.0, 1.0, s);
    y = s.y_new;
    s.k[0] = s.k[6];
    t += h;
  }
  return std::abs(y[0] - std::cos(t));
}

double adaptive_error(double tol) {
  IntegratorConfig cfg;
  cfg.rel_tol = tol;
  cfg.abs_tol = tol;
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  const double T = 2 * std::numbers::pi;
  const double times[] = {T};
  const auto out = integrate_and_sample(kOscillator, 0.0, y0, times, cfg);
  return std::abs(out(0, 0) - 1.0);
}

}  // namespace

TEST_CASE("map steps") {
  const auto henon = default_params(SystemKind::Henon);
  CHECK(map_step(SystemKind::Henon, henon, {0, 0}) == Eigen::Vector2d(1, 0));
  CHECK(map_step(SystemKind::Ikeda, default_params(SystemKind::Ikeda), {0, 0}) == Eigen::Vector2d(1, 0));
  const auto r = map_step(SystemKind::Rulkov, default_params(SystemKind::Rulkov), {0, 0});
  CHECK(r.x() == doctest::Approx(3.75));
  CHECK(r.y() == doctest::Approx(-1e-4));
}

TEST_CASE("henon fixed point") {
  const double a = 1.4, b = 0.3;
  const double x = (b - 1 + std::sqrt((1 - b) * (1 - b) + 4 * a)) / (2 * a);
  const Eigen::Vector2d fp(x, b * x);
  const auto next = map_step(SystemKind::Henon, default_params(SystemKind::Henon), fp);
  CHECK((next - fp).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("map iteration: transient, determinism, divergence") {
  const auto p = default_params(SystemKind::Henon);
  const Eigen::Vector2d x0(0.1, -0.2);
  Eigen::Vector2d s = x0;
  for (int i = 0; i < 37; ++i) s = map_step(SystemKind::Henon, p, s);
  const auto cloud = iterate_map(SystemKind::Henon, p, x0, 5, 37);
  CHECK(cloud.point(0).transpose() == s);
  CHECK(cloud.point(1).transpose() == map_step(SystemKind::Henon, p, s));
  CHECK(cloud.points() == iterate_map(SystemKind::Henon, p, x0, 5, 37).points());

  try {
    iterate_map(SystemKind::Henon, p, {3.0, 3.0}, 10, 100);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Divergence);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("parameters") {
  CHECK(merge_params(SystemKind::Lorenz, {{"rho", 20}}).at("rho") == 20);
  CHECK(merge_params(SystemKind::Lorenz, {{"rho", 20}}).at("sigma") == 10);
  CHECK_THROWS_AS(merge_params(SystemKind::Lorenz, {{"I", 0}}), Error);
  for (auto k : {SystemKind::Henon, SystemKind::Ikeda, SystemKind::Rulkov, SystemKind::Lorenz,
                 SystemKind::MackeyGlass}) {
    CHECK(parse_system_kind(to_string(k)) == k);
  }
  const auto mg = SystemSpec::defaults(SystemKind::MackeyGlass);
  CHECK(mg.params.at("m") == 8);
  CHECK(mg.sample_interval == doctest::Approx(3.0 / 7));
  CHECK(SystemSpec::defaults(SystemKind::Lorenz).integrator.rel_tol == 1e-9);
}

TEST_CASE("RK45 on the harmonic oscillator") {
  CHECK(adaptive_error(1e-9) < 1e-7);
}

TEST_CASE("RK45 order verification") {
  // Fifth-order global error: halving h divides the error by about 32, and
  // always by at least 4 over a decade of step sizes.
  const double T = 2 * std::numbers::pi;
  double h = 0.4;
  for (int i = 0; i < 4; ++i, h /= 2) {
    const double e1 = fixed_step_error(h, T * 4);
    const double e2 = fixed_step_error(h / 2, T * 4);
    CHECK(e1 / e2 >= 4.0);
    CHECK(std::log2(e1 / e2) == doctest::Approx(5.0).epsilon(0.1));
  }
  // Adaptive control: tighter tolerance never loses accuracy and a decade
  // of tolerance buys at least a factor of 4.
  for (double tol = 1e-4; tol >= 1e-9; tol /= 10) {
    CHECK(adaptive_error(tol / 10) * 4 <= adaptive_error(tol));
  }
}

TEST_CASE("dense output tracks the solution") {
  DormandPrince dp(kOscillator, {});
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  dp.reset(0.0, y0);
  for (int i = 0; i < 20; ++i) {
    dp.step(100.0);
    const double a = dp.t_previous(), b = dp.t();
    for (double w : {0.1, 0.5, 0.9}) {
      const double t = a + w * (b - a);
      CHECK(std::abs(dp.dense(t)[0] - std::cos(t)) < 1e-7);
    }
  }
  CHECK(hermite(0, 1, 0, 1, 2, 3, 0) == 1);
  CHECK(hermite(0, 1, 0, 1, 2, 3, 1) == 2);
}

TEST_CASE("lorenz") {
  const auto p = default_params(SystemKind::Lorenz);
  const double c = std::sqrt(72.0);
  IntegratorConfig cfg;
  const auto eq = integrate_lorenz(p, Eigen::Vector3d(c, c, 27), 0.0, 101, 0.1, cfg);
  CHECK((eq.points().rowwise() - Eigen::RowVector3d(c, c, 27)).cwiseAbs().maxCoeff() < 1e-8);

  auto spec = SystemSpec::defaults(SystemKind::Lorenz);
  spec.n_points = 100'000;
  const auto traj = generate_trajectory(spec, 3);
  CHECK(traj.dim() == 3);
  CHECK(traj.size() == 100'000);
  CHECK(traj.points().col(0).cwiseAbs().maxCoeff() <= 30);
  CHECK(traj.points().col(1).cwiseAbs().maxCoeff() <= 30);
  CHECK(traj.points().col(2).minCoeff() >= 0);
  CHECK(traj.points().col(2).maxCoeff() <= 60);

  spec.n_points = 200;
  spec.transient = 50;
  CHECK(generate_trajectory(spec, 9).points() == generate_trajectory(spec, 9).points());
}

TEST_CASE("lorenz samples land on exact times") {
  const auto p = default_params(SystemKind::Lorenz);
  IntegratorConfig cfg;
  const Eigen::Vector3d x0(1, 1, 1);
  const auto a = integrate_lorenz(p, x0, 2.0, 3, 0.1, cfg);
  const auto b = integrate_lorenz(p, x0, 2.1, 2, 0.1, cfg);
  CHECK((a.points().bottomRows(2) - b.points()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("mackey-glass equilibria and window consistency") {
  const auto p = default_params(SystemKind::MackeyGlass);
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-5;
  const auto ones = integrate_mackey_glass(p, DelayHistory::constant(1.0, 3.0), 50.0, 200, cfg);
  CHECK(ones.dim() == 8);
  CHECK((ones.points().array() - 1.0).abs().maxCoeff() < 1e-6);
  const auto zeros = integrate_mackey_glass(p, DelayHistory::constant(0.0, 3.0), 50.0, 50, cfg);
  CHECK(zeros.points().cwiseAbs().maxCoeff() == 0.0);

  auto spec = SystemSpec::defaults(SystemKind::MackeyGlass);
  spec.transient = 500;
  spec.n_points = 5000;
  const auto traj = generate_trajectory(spec, 5);
  CHECK(traj.points().minCoeff() > 0.0);
  CHECK(traj.points().maxCoeff() < 2.5);
  double worst = 0.0;
  for (Index k = 0; k + 1 < traj.size(); ++k) {
    for (Index j = 0; j + 1 < 8; ++j) {
      worst = std::max(worst, std::abs(traj.point(k)(j) - traj.point(k + 1)(j + 1)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("mackey-glass history validation") {
  const auto p = default_params(SystemKind::MackeyGlass);
  DelayHistory shortened{-1.0, 0.5, {1, 1, 1}};
  try {
    integrate_mackey_glass(p, shortened, 10.0, 10, {});
    FAIL("expected invalid history");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidHistory);
  }
  DelayHistory ramp{-3.0, 1.0, {0, 1, 2, 3}};
  CHECK(ramp(-2.5) == doctest::Approx(0.5));
  CHECK(ramp.end() == 0.0);
}

TEST_CASE("random initial conditions stay in the basin") {
  for (auto k : {SystemKind::Henon, SystemKind::Ikeda, SystemKind::Rulkov}) {
    auto spec = SystemSpec::defaults(k);
    spec.n_points = 2000;
    spec.transient = 1000;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      CHECK_NOTHROW(generate_trajectory(spec, seed));
    }
    const auto a = random_initial_condition(k, 1).state;
    CHECK(a == random_initial_condition(k, 1).state);
    CHECK(a != random_initial_condition(k, 2).state);
  }
  const auto mg = random_initial_condition(SystemKind::MackeyGlass, 4).history;
  CHECK(mg.values.front() >= 0.5);
  CHECK(mg.values.front() <= 1.5);
  const auto lz = random_initial_condition(SystemKind::Lorenz, 4).state;
  CHECK(lz.cwiseAbs().maxCoeff() <= 10.0);
}
