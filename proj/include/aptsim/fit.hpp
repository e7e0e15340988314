#pragma once

// One-parameter nonlinear least squares by damped Gauss-Newton.

#include <cmath>
#include <cstddef>
#include <functional>
#include <algorithm>
#include <limits>
#include <span>

#include "aptsim/errors.hpp"

namespace aptsim {

struct FitResult {
  double value{0.0};
  double std_error{0.0};  // sqrt(s^2 / sum(J^2)), s^2 the residual variance
  double sse{0.0};
  int iterations{0};
  bool alias_warning{false};
};

struct GaussNewtonOptions {
  int max_iterations = 50;
  double step_tol = 1e-12;  // relative to max(|theta|, 1)
  int max_failed_steps = 10;
};

using ScalarModel = std::function<double(double x, double theta)>;

namespace detail {

inline double sum_squared_residuals(std::span<const double> xs, std::span<const double> ys,
                                    const ScalarModel& f, double theta) {
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - f(xs[i], theta);
    sse += r * r;
  }
  return sse;
}

inline double sum_squared_jacobian(std::span<const double> xs, const ScalarModel& df,
                                   double theta) {
  double s = 0.0;
  for (double x : xs) s += df(x, theta) * df(x, theta);
  return s;
}

}  // namespace detail

/// Minimizes sum (y - f(x, theta))^2 starting from theta0. df is the partial
/// derivative of f with respect to theta. Throws FitDiverged after
/// max_failed_steps consecutive damped steps that do not reduce the residual.
inline FitResult gauss_newton_1d(std::span<const double> xs, std::span<const double> ys,
                                 const ScalarModel& f, const ScalarModel& df, double theta0,
                                 const GaussNewtonOptions& opt = {}) {
  double theta = theta0;
  double sse = detail::sum_squared_residuals(xs, ys, f, theta);
  double lambda = 1e-3;
  int failed = 0;
  int it = 0;

  for (; it < opt.max_iterations; ++it) {
    double jtr = 0.0;
    double jtj = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = df(xs[i], theta);
      jtr += d * (ys[i] - f(xs[i], theta));
      jtj += d * d;
    }
    if (jtj == 0.0) break;

    const double gn_step = jtr / jtj;
    if (std::abs(gn_step) <= opt.step_tol * std::max(std::abs(theta), 1.0)) {
      theta += gn_step;
      sse = detail::sum_squared_residuals(xs, ys, f, theta);
      break;
    }

    bool accepted = false;
    while (!accepted) {
      const double step = jtr / (jtj * (1.0 + lambda));
      const double trial = theta + step;
      const double trial_sse = detail::sum_squared_residuals(xs, ys, f, trial);
      if (trial_sse < sse) {
        theta = trial;
        sse = trial_sse;
        lambda = std::max(lambda / 10.0, 1e-12);
        failed = 0;
        accepted = true;
      } else {
        lambda *= 10.0;
        if (++failed >= opt.max_failed_steps) {
          // Near a minimum the residual sum stops changing at rounding level,
          // and a residual already at rounding level cannot decrease further.
          const bool stationary = std::abs(gn_step) <= 1e-8 * std::max(std::abs(theta), 1.0);
          if (stationary || sse <= 1e-28 * static_cast<double>(xs.size())) break;
          throw FitDiverged("least-squares residual stopped decreasing");
        }
      }
    }
    if (!accepted) break;
  }

  FitResult out;
  out.value = theta;
  out.sse = sse;
  out.iterations = it;
  const double jtj = detail::sum_squared_jacobian(xs, df, theta);
  const double dof = static_cast<double>(xs.size() > 1 ? xs.size() - 1 : 1);
  out.std_error = jtj > 0.0 ? std::sqrt(sse / dof / jtj) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace aptsim
