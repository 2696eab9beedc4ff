#include "wavegec/mode_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wavegec/errors.hpp"

namespace wavegec::mode_dynamics {

namespace {
constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double u, v;
};

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// y5 - y4 weights (error estimate).
constexpr double kE[7] = {71.0 / 57600,  0.0,          -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

// Quintic Hermite basis on [0,1] using values and first two derivatives at
// both ends; matches the order of the step, so interior sampling does not
// degrade the trace.
double quintic(double f0, double d0, double s0, double f1, double d1, double s1, double h,
               double theta) {
  const double t = theta;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double t5 = t4 * t;
  const double h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
  const double h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
  const double h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  const double h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
  const double h21 = 0.5 * t3 - t4 + 0.5 * t5;
  return f0 * h00 + h * d0 * h10 + h * h * s0 * h20 + f1 * h01 + h * d1 * h11 + h * h * s1 * h21;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(steps_per_period >= 10.0)) {
    throw PreconditionError("IntegratorConfig: steps_per_period must be >= 10");
  }
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw PreconditionError("IntegratorConfig: tolerances must be positive");
  }
}

EnergyTrace integrate_mode(const coefficients::Coefficient& coeff, double lambda,
                           const ModeState& initial, double t_end, const IntegratorConfig& config,
                           std::span<const double> sample_times) {
  config.validate();
  if (!(lambda > 0.0)) throw PreconditionError("integrate_mode: need lambda > 0");
  if (lambda > config.lambda_cap) {
    throw ResourceError("integrate_mode: lambda exceeds the configured cap");
  }
  if (initial.t < coeff.domain_start()) {
    throw PreconditionError("integrate_mode: initial time below coefficient domain");
  }
  if (!std::isfinite(initial.u) || !std::isfinite(initial.v)) {
    throw PreconditionError("integrate_mode: non-finite initial state");
  }

  const double dir = t_end >= initial.t ? 1.0 : -1.0;
  const double c_inf = coeff.c_inf();
  const double sup_c = std::max(coeff.upper_bound(), 1e-300);
  const double h_cap =
      std::min(config.max_step, 2.0 * kPi / (config.steps_per_period * lambda * std::sqrt(sup_c)));

  EnergyTrace trace;
  trace.lambda = lambda;
  trace.c_inf_used = c_inf;

  auto rhs = [&](double t, const Vec2& y) -> Vec2 {
    return {y.v, -lambda * lambda * coeff.value(t) * y.u};
  };
  auto push_sample = [&](double t, const Vec2& y) {
    TraceSample s;
    s.t = t;
    s.u = y.u;
    s.v = y.v;
    const ModeState st{t, y.u, y.v, lambda};
    s.e_kow = kowaleskian_energy(st, c_inf);
    const double c = coeff.value(t);
    const double c1 = coeff.deriv1(t);
    s.e_tar = tarama_energy(st, c, c1);
    s.tarama_ok = lambda >= std::abs(c1) / (2.0 * std::pow(c, 1.5));
    trace.samples.push_back(s);
  };

  // Pending interior sample times, ordered along the direction of travel.
  std::vector<double> pending(sample_times.begin(), sample_times.end());
  std::sort(pending.begin(), pending.end());
  if (dir < 0.0) std::reverse(pending.begin(), pending.end());
  size_t next_sample = 0;
  auto passed = [&](double a, double b) { return dir > 0.0 ? a >= b : a <= b; };
  while (next_sample < pending.size() && passed(initial.t, pending[next_sample])) {
    if (pending[next_sample] == initial.t) break;
    ++next_sample;
  }

  Vec2 y{initial.u, initial.v};
  double t = initial.t;
  push_sample(t, y);
  if (next_sample < pending.size() && pending[next_sample] == initial.t) ++next_sample;

  if (t_end == initial.t) return trace;

  Vec2 k[7];
  k[0] = rhs(t, y);
  double h = dir * std::min(h_cap, std::abs(t_end - initial.t));

  while (!passed(t, t_end)) {
    if (trace.stats.steps + trace.stats.rejected >= config.max_steps) {
      throw ResourceError("integrate_mode: step budget exhausted");
    }
    const double remaining = t_end - t;
    if (std::abs(h) > std::abs(remaining)) h = remaining;

    for (int stage = 1; stage < 7; ++stage) {
      Vec2 acc{0.0, 0.0};
      for (int j = 0; j < stage; ++j) {
        acc.u += kA[stage][j] * k[j].u;
        acc.v += kA[stage][j] * k[j].v;
      }
      const Vec2 ys{y.u + h * acc.u, y.v + h * acc.v};
      k[stage] = rhs(t + kC[stage] * h, ys);
    }
    // Stage 7 coefficients are the 5th-order solution weights.
    Vec2 ynew{y.u, y.v};
    for (int j = 0; j < 6; ++j) {
      ynew.u += h * kA[6][j] * k[j].u;
      ynew.v += h * kA[6][j] * k[j].v;
    }
    Vec2 err{0.0, 0.0};
    for (int j = 0; j < 7; ++j) {
      err.u += kE[j] * k[j].u;
      err.v += kE[j] * k[j].v;
    }
    err.u *= h;
    err.v *= h;
    const double scale_u = config.abs_tol + config.rel_tol * std::max(std::abs(y.u), std::abs(ynew.u));
    const double scale_v = config.abs_tol + config.rel_tol * std::max(std::abs(y.v), std::abs(ynew.v));
    const double err_norm = std::sqrt(0.5 * ((err.u / scale_u) * (err.u / scale_u) +
                                             (err.v / scale_v) * (err.v / scale_v)));

    if (err_norm <= 1.0) {
      const double t_new = t + h;
      if (!std::isfinite(ynew.u) || !std::isfinite(ynew.v)) {
        throw NumericError("integrate_mode: state became non-finite");
      }
      trace.stats.steps += 1;
      trace.stats.max_error_est = std::max(trace.stats.max_error_est, err_norm);

      // Interior samples inside (t, t_new] via the quintic interpolant.
      if (next_sample < pending.size()) {
        const double c0 = coeff.value(t);
        const double c0p = coeff.deriv1(t);
        const double c1 = coeff.value(t_new);
        const double c1p = coeff.deriv1(t_new);
        const double au0 = -lambda * lambda * c0 * y.u;           // u'' at left
        const double au1 = -lambda * lambda * c1 * ynew.u;        // u'' at right
        const double av0 = -lambda * lambda * (c0p * y.u + c0 * y.v);   // v'' at left
        const double av1 = -lambda * lambda * (c1p * ynew.u + c1 * ynew.v);
        while (next_sample < pending.size() && passed(t_new, pending[next_sample]) &&
               !passed(t, pending[next_sample])) {
          const double ts = pending[next_sample];
          if (ts == t_new) break;  // handled below as a step point if recording
          const double theta = (ts - t) / h;
          const double us = quintic(y.u, k[0].u, au0, ynew.u, k[6].u, au1, h, theta);
          const double vs = quintic(y.v, au0, av0, ynew.v, au1, av1, h, theta);
          push_sample(ts, {us, vs});
          ++next_sample;
        }
      }
      const bool sample_here =
          config.record_steps ||
          (next_sample < pending.size() && pending[next_sample] == t_new) || passed(t_new, t_end);
      if (sample_here) {
        push_sample(t_new, ynew);
        while (next_sample < pending.size() && pending[next_sample] == t_new) ++next_sample;
      }

      y = ynew;
      t = t_new;
      k[0] = k[6];  // FSAL
      const double grow = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
      h = dir * std::min({std::abs(h) * std::clamp(grow, 0.2, 5.0), h_cap});
    } else {
      trace.stats.rejected += 1;
      const double shrink = std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      h *= shrink;
      if (std::abs(h) < std::abs(t) * 1e-15 + 1e-300) {
        throw NumericError("integrate_mode: step size underflow");
      }
      // k[0] is still the left-end derivative; retry with the smaller step.
    }
  }
  return trace;
}

ModeState integrate_to(const coefficients::Coefficient& coeff, double lambda,
                       const ModeState& initial, double t_end, const IntegratorConfig& config,
                       IntegrationStats* stats) {
  EnergyTrace trace = integrate_mode(coeff, lambda, initial, t_end, config);
  if (stats) *stats = trace.stats;
  const TraceSample& last = trace.samples.back();
  return ModeState{last.t, last.u, last.v, lambda};
}

std::pair<double, double> closed_form_dgcs(double m, double lambda, const SmoothFunction& eps,
                                           double t0, double t, const QuadratureOptions& opts) {
  if (t < t0) throw std::domain_error("closed_form_dgcs: t below t0");
  const double omega = m * lambda;
  const double J = integrate(
      [&](double s) {
        const double si = std::sin(omega * s);
        return eps(s) * si * si;
      },
      t0, t, opts);
  const double growth = std::exp(J / (8.0 * m * m));
  const double s = std::sin(omega * t);
  const double w = s / omega * growth;
  const double wp = std::cos(omega * t) * growth + s / omega * growth * eps(t) * s * s / (8.0 * m * m);
  return {w, wp};
}

std::pair<double, double> closed_form_no_way(double t) {
  static const SmoothFunction inv_t(
      [](double s) { return 1.0 / s; }, [](double s) { return -1.0 / (s * s); },
      [](double s) { return 2.0 / (s * s * s); }, [](double s) { return -6.0 / (s * s * s * s); });
  return closed_form_dgcs(1.0, 1.0, inv_t, 1.0, t);
}

double kowaleskian_energy(const ModeState& s, double c_inf) {
  if (!(c_inf > 0.0)) throw PreconditionError("kowaleskian_energy: need c_inf > 0");
  const double r = std::sqrt(c_inf);
  return s.v * s.v / r + s.lambda * s.lambda * r * s.u * s.u;
}

double tarama_energy(const ModeState& s, double c, double c_prime) {
  if (!(c > 0.0)) throw PreconditionError("tarama_energy: need c > 0");
  const double r = std::sqrt(c);
  return s.v * s.v / r + s.lambda * s.lambda * r * s.u * s.u +
         0.5 * (c_prime / (c * r)) * s.u * s.v;
}

bool tarama_valid(double lambda, const coefficients::Coefficient& coeff, double t) {
  const double c = coeff.value(t);
  const double c1 = coeff.deriv1(t);
  return lambda >= std::abs(c1) / (2.0 * std::pow(c, 1.5));
}

}  // namespace wavegec::mode_dynamics
