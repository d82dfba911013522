#include "fracdim/ode.hpp"

#include <sstream>

namespace fracdim {

DormandPrince::DormandPrince(Rhs rhs, IntegratorConfig cfg) : rhs_(std::move(rhs)), cfg_(cfg) {
  if (!(cfg_.rel_tol > 0.0) || !(cfg_.abs_tol > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "integrator tolerances must be positive");
  }
}

void DormandPrince::reset(double t0, const Eigen::VectorXd& y0) {
  t_ = t_prev_ = t0;
  y_ = y_prev_ = y0;
  stages_ = DopriStages(y0.size());
  for (auto& c : cont_) c = Eigen::VectorXd::Zero(y0.size());
  cont_[0] = y0;
  h_last_ = 0.0;
  rhs_(t_, y_, stages_.k[0]);
  h_ = cfg_.initial_step > 0.0 ? cfg_.initial_step : initial_step();
}

double DormandPrince::initial_step() {
  const Index n = y_.size();
  Eigen::VectorXd sc(n);
  for (Index i = 0; i < n; ++i) sc[i] = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
  const auto& f0 = stages_.k[0];
  const double d0 = (y_.array() / sc.array()).matrix().norm() / std::sqrt(double(n));
  const double d1 = (f0.array() / sc.array()).matrix().norm() / std::sqrt(double(n));
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, cfg_.max_step);
  Eigen::VectorXd y1 = y_ + h0 * f0;
  Eigen::VectorXd f1(n);
  rhs_(t_ + h0, y1, f1);
  const double d2 = ((f1 - f0).array() / sc.array()).matrix().norm() / std::sqrt(double(n)) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, cfg_.max_step});
}

void DormandPrince::step(double t_limit) {
  if (!(t_limit > t_)) return;
  for (;;) {
    double h = std::min({h_, cfg_.max_step, t_limit - t_});
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_))) {
      std::ostringstream msg;
      msg << "step size " << h << " underflowed at t = " << t_;
      throw Error(ErrorKind::StepUnderflow, msg.str());
    }
    if (accepted_ + rejected_ >= cfg_.max_steps) {
      throw Error(ErrorKind::StepUnderflow, "maximum number of integration steps exceeded");
    }
    const double err = dopri_attempt(rhs_, t_, y_, h, cfg_.rel_tol, cfg_.abs_tol, stages_);
    const double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
    if (!std::isfinite(err) || err > 1.0) {
      ++rejected_;
      h_ = h * std::min(1.0, std::isfinite(err) ? fac : 0.2);
      continue;
    }
    using namespace dopri;
    const auto& k = stages_.k;
    const bool hit_limit = h == t_limit - t_;
    t_prev_ = t_;
    y_prev_ = y_;
    cont_[0] = y_prev_;
    cont_[1] = stages_.y_new - y_prev_;
    cont_[2] = h * k[0] - cont_[1];
    cont_[3] = cont_[1] - h * k[6] - cont_[2];
    cont_[4] = h * (d1 * k[0] + d3 * k[2] + d4 * k[3] + d5 * k[4] + d6 * k[5] + d7 * k[6]);
    h_last_ = h;
    t_ = hit_limit ? t_limit : t_ + h;
    y_ = stages_.y_new;
    stages_.k[0] = stages_.k[6];
    ++accepted_;
    // A step cut short to land on t_limit should not shrink the next one.
    if (!hit_limit) h_ = h * fac;
    return;
  }
}

void DormandPrince::advance_to(double t_end) {
  while (t_ < t_end) step(t_end);
}

Eigen::VectorXd DormandPrince::dense(double t) const {
  if (h_last_ == 0.0) return y_;
  const double theta = (t - t_prev_) / h_last_;
  const double theta1 = 1.0 - theta;
  return cont_[0] +
         theta * (cont_[1] + theta1 * (cont_[2] + theta * (cont_[3] + theta1 * cont_[4])));
}

Eigen::MatrixXd integrate_and_sample(const DormandPrince::Rhs& rhs, double t0,
                                     const Eigen::VectorXd& y0, std::span<const double> times,
                                     const IntegratorConfig& cfg) {
  DormandPrince solver(rhs, cfg);
  solver.reset(t0, y0);
  Eigen::MatrixXd out(static_cast<Index>(times.size()), y0.size());
  const double t_end = times.empty() ? t0 : times.back();
  std::size_t next = 0;
  while (next < times.size() && times[next] <= solver.t()) {
    out.row(static_cast<Index>(next++)) = solver.y().transpose();
  }
  while (next < times.size()) {
    solver.step(t_end);
    while (next < times.size() && times[next] <= solver.t()) {
      const double tq = times[next];
      out.row(static_cast<Index>(next++)) =
          (tq == solver.t() ? solver.y() : solver.dense(tq)).transpose();
    }
  }
  return out;
}

}  // namespace fracdim
