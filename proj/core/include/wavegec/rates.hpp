#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "wavegec/quadrature.hpp"
#include "wavegec/smooth_function.hpp"

namespace wavegec::rates {

// Fixed constants of a coefficient class: start time, hyperbolicity bounds,
// optional derivative-control constant for the rate function, and the
// stabilization constant (in speed-squared units).
struct ClassParams {
  double t0 = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::optional<double> lambda3;
  double c_inf = 1.0;

  // c_inf defaults to the midpoint (Lambda1 + Lambda2) / 2 when unset, the
  // value used by every constructed counterexample.
  static ClassParams make(double t0, double lambda1, double lambda2,
                          std::optional<double> lambda3 = std::nullopt,
                          std::optional<double> c_inf = std::nullopt);
  void validate() const;
};

enum class Monotonicity { non_increasing, non_decreasing };

struct PowerForm {
  double beta;   // gamma(t) = t^-beta
  double alpha;  // S(t) = t^alpha
};

// The rate pair (gamma, S) together with the derived cumulative rate
// G(t) = integral of gamma^2 and the growth envelope M(t) = running max of
// G*S.  Power-law profiles carry closed forms for G and M; custom profiles
// fall back to cached adaptive quadrature and a refinable geometric grid.
//
// Immutable after construction; internal caches are mutex-guarded, so one
// profile may be shared across worker threads.
class RateProfile {
 public:
  static RateProfile power(double beta, double alpha, double t0);
  static RateProfile custom(SmoothFunction gamma, Monotonicity gamma_monotonicity,
                            SmoothFunction stab, bool stab_vanishes, double t0,
                            std::optional<SmoothFunction> exact_G = std::nullopt);

  double t0() const;
  double gamma(double t) const;
  double gamma_derivative(double t, int order) const;
  int gamma_max_order() const;
  Monotonicity gamma_monotonicity() const;
  double stab(double t) const;
  bool stab_vanishes() const;  // false marks the admitted "non-vanishing" limit case
  std::optional<PowerForm> power_form() const;

  double G(double t) const;  // integral of gamma^2 from t0; domain error below t0
  double M(double t) const;  // running max of G*S over [t0, t]
  double GS(double t) const { return G(t) * stab(t); }

  // Smallest constant bounding |gamma^(j)| / gamma for j = 1..3 (closed form
  // for powers, grid estimate for custom profiles).
  double derived_lambda3() const;
  // Checks max{|g'|,|g''|,|g'''|} <= lambda3 * gamma on a grid; throws
  // PreconditionError on violation.
  void verify_lambda3(double lambda3, double t_hi, int n = 1000) const;

  SmoothFunction gamma_squared() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  explicit RateProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

struct Classification {
  enum class Kind { gec, growth, log_corrected } kind;
  double exponent = 0.0;  // (1 + alpha)/2 - beta for the growth case
};

// The power-law trichotomy: GEC iff 2 beta >= 1 + alpha, except the limit
// case alpha = 0, beta = 1/2 where M grows like log t.  alpha > 0 is out of
// scope (throws PreconditionError).
Classification classify_power(double beta, double alpha);

// Constants (Gamma1, Gamma2) for a monotone g with |g'| <= lambda4 * g:
// g(t) <= Gamma1 * G(t) and G(t+1) <= Gamma2 * G(t) for t >= t0 + 1, with
// G the integral of g from t0.  The derivative bound is spot-checked on a
// grid over [t0, t0 + precheck_span].
std::pair<double, double> exp_growth_constants(const SmoothFunction& g, double lambda4, double t0,
                                               double precheck_span = 10.0, int precheck_n = 256);

// Lower bound (G(beta) - G(alpha))/2 - max{g(alpha), g(beta)}/ell for the
// oscillating integral of g * sin^2(ell t) over [alpha, beta].
double osc_integral_bound(const std::function<double(double)>& g, double alpha, double beta,
                          double ell);

struct OscIntegralCheck {
  double bound = 0.0;
  double integral = 0.0;
  bool ok = false;
};

// Companion check: evaluates the integral by quadrature and compares.
OscIntegralCheck osc_integral_check(const std::function<double(double)>& g, double alpha,
                                    double beta, double ell, const QuadratureOptions& opts = {});

}  // namespace wavegec::rates
