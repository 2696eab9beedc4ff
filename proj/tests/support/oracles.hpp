#pragma once

// Independent oracles used by the test suites: finite-difference residuals
// against the mode equation, log-log slope regression, and generators for
// random monotone rate functions.  Everything here stays independent of the
// implementation paths it checks.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "wavegec/quadrature.hpp"
#include "wavegec/smooth_function.hpp"

namespace wavegec::testing {

// 5-point central second derivative.
inline double second_derivative_5pt(const std::function<double(double)>& f, double t, double h) {
  return (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h) - f(t - 2.0 * h)) /
         (12.0 * h * h);
}

// Relative residual of w'' + lambda^2 c w = 0 under 5-point differentiation,
// normalized by the local oscillation amplitude (pointwise normalization is
// ill-posed at the zeros of w, where both terms vanish together).  The w
// evaluator must be internally coherent across the five stencil points.
inline double ode_residual(const std::function<double(double)>& w,
                           const std::function<double(double)>& c, double lambda, double t,
                           double h, double amplitude) {
  const double wpp = second_derivative_5pt(w, t, h);
  const double forcing = lambda * lambda * c(t) * w(t);
  const double scale = lambda * lambda * c(t) * amplitude;
  if (scale == 0.0) return 0.0;
  return std::abs(wpp + forcing) / scale;
}

// Coherent sampler for the growing closed form: w(t) built from one
// cumulative quadrature object so that stencil points share their baseline.
class ClosedFormSampler {
 public:
  ClosedFormSampler(double m, double lambda, SmoothFunction eps, double t0)
      : m_(m), lambda_(lambda), eps_(std::move(eps)),
        cum_([this](double s) {
          const double si = std::sin(m_ * lambda_ * s);
          return eps_(s) * si * si;
        }, t0, QuadratureOptions{1e-14, 1e-11, 60, 200'000'000}) {}

  double w(double t) const {
    const double omega = m_ * lambda_;
    return std::sin(omega * t) / omega * std::exp(cum_.upto(t) / (8.0 * m_ * m_));
  }
  double wp(double t) const {
    const double omega = m_ * lambda_;
    const double s = std::sin(omega * t);
    const double g = std::exp(cum_.upto(t) / (8.0 * m_ * m_));
    return std::cos(omega * t) * g + s / omega * g * eps_(t) * s * s / (8.0 * m_ * m_);
  }
  // Local oscillation amplitude, bounded away from zero along the solution.
  double amplitude(double t) const {
    const double omega = m_ * lambda_;
    const double wv = w(t);
    const double wd = wp(t);
    return std::sqrt(wv * wv + (wd / omega) * (wd / omega));
  }

 private:
  double m_, lambda_;
  SmoothFunction eps_;
  CumulativeIntegral cum_;
};

struct MonotoneFunctionCase {
  SmoothFunction g;
  double lambda4;  // valid bound for |g'| <= lambda4 * g
};

// Random monotone positive test functions with a known derivative-ratio
// bound: powers t^p (t0 > 0) and exponentials exp(r t).
inline MonotoneFunctionCase random_monotone(std::mt19937_64& rng, double t0) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < 0.5) {
    std::uniform_real_distribution<double> pd(-2.0, 2.0);
    const double p = pd(rng);
    return {SmoothFunction::power(p), std::abs(p) / std::max(t0, 0.1)};
  }
  std::uniform_real_distribution<double> rd(-0.8, 0.8);
  const double r = rd(rng);
  return {SmoothFunction::exponential(r), std::abs(r)};
}

inline std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out.push_back(lo * std::pow(hi / lo, s));
  }
  return out;
}

}  // namespace wavegec::testing
