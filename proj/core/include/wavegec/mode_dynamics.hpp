#pragma once

#include <span>
#include <vector>

#include "wavegec/coefficients.hpp"
#include "wavegec/quadrature.hpp"

namespace wavegec::mode_dynamics {

struct ModeState {
  double t = 0.0;
  double u = 0.0;
  double v = 0.0;       // u'
  double lambda = 1.0;  // > 0
};

struct IntegratorConfig {
  double steps_per_period = 40.0;  // eta; every oscillation gets resolved
  double max_step = std::numeric_limits<double>::infinity();
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  double lambda_cap = 1e4;
  long long max_steps = 1'000'000'000;
  bool record_steps = false;  // also record every accepted step in the trace

  void validate() const;
};

struct TraceSample {
  double t = 0.0, u = 0.0, v = 0.0;
  double e_kow = 0.0;
  double e_tar = 0.0;
  bool tarama_ok = false;
};

struct IntegrationStats {
  long long steps = 0;
  long long rejected = 0;
  double max_error_est = 0.0;
};

struct EnergyTrace {
  std::vector<TraceSample> samples;  // strictly increasing t (or decreasing, backward runs)
  IntegrationStats stats;
  double lambda = 0.0;
  double c_inf_used = 0.0;
};

// Explicit Dormand-Prince 5(4) with the oscillation-resolving step cap
// 2*pi / (eta * lambda * sqrt(sup c)).  Samples at requested interior times
// come from a quintic Hermite interpolant (same order as the step); the
// final time is hit exactly.  Backward integration (t_end < state.t) is
// supported.
EnergyTrace integrate_mode(const coefficients::Coefficient& coeff, double lambda,
                           const ModeState& initial, double t_end,
                           const IntegratorConfig& config = {},
                           std::span<const double> sample_times = {});

// Endpoint-only variant.
ModeState integrate_to(const coefficients::Coefficient& coeff, double lambda,
                       const ModeState& initial, double t_end, const IntegratorConfig& config = {},
                       IntegrationStats* stats = nullptr);

// w(t) = sin(m lambda t)/(m lambda) * exp( (1/(8 m^2)) * integral of
// eps(s) sin^2(m lambda s) over [t0, t] ), and its derivative.
std::pair<double, double> closed_form_dgcs(double m, double lambda, const SmoothFunction& eps,
                                           double t0, double t, const QuadratureOptions& opts = {});

// The explicit growing solution on [1, +inf): sin(t) * exp((1/8) int_1^t sin^2(s)/s ds).
std::pair<double, double> closed_form_no_way(double t);

double kowaleskian_energy(const ModeState& s, double c_inf);
double tarama_energy(const ModeState& s, double c, double c_prime);
bool tarama_valid(double lambda, const coefficients::Coefficient& coeff, double t);

}  // namespace wavegec::mode_dynamics
