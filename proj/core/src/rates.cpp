#include "wavegec/rates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "wavegec/errors.hpp"

namespace wavegec::rates {

ClassParams ClassParams::make(double t0, double lambda1, double lambda2,
                              std::optional<double> lambda3, std::optional<double> c_inf) {
  ClassParams p;
  p.t0 = t0;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.lambda3 = lambda3;
  p.c_inf = c_inf.value_or(0.5 * (lambda1 + lambda2));
  p.validate();
  return p;
}

void ClassParams::validate() const {
  if (!(lambda1 > 0.0) || !(lambda1 <= lambda2)) {
    throw PreconditionError("ClassParams: need 0 < lambda1 <= lambda2");
  }
  if (!(lambda1 <= c_inf && c_inf <= lambda2)) {
    throw PreconditionError("ClassParams: need lambda1 <= c_inf <= lambda2");
  }
  if (lambda3 && !(*lambda3 >= 0.0)) {
    throw PreconditionError("ClassParams: lambda3 must be non-negative");
  }
}

struct RateProfile::Impl {
  double t0 = 1.0;
  SmoothFunction gamma;
  Monotonicity gamma_mono = Monotonicity::non_increasing;
  SmoothFunction stab;
  bool stab_vanishes = true;
  std::optional<PowerForm> form;
  std::optional<SmoothFunction> exact_G;

  // custom-profile caches
  mutable std::unique_ptr<CumulativeIntegral> g_quad;
  mutable std::map<double, double> m_cache;
  mutable std::mutex m_mutex;
};

RateProfile RateProfile::power(double beta, double alpha, double t0) {
  if (!(t0 > 0.0)) throw PreconditionError("RateProfile::power: need t0 > 0");
  auto impl = std::make_shared<Impl>();
  impl->t0 = t0;
  impl->gamma = SmoothFunction::power(-beta);
  impl->gamma_mono = beta >= 0.0 ? Monotonicity::non_increasing : Monotonicity::non_decreasing;
  impl->stab = SmoothFunction::power(alpha);
  impl->stab_vanishes = alpha < 0.0;
  impl->form = PowerForm{beta, alpha};
  return RateProfile(std::move(impl));
}

RateProfile RateProfile::custom(SmoothFunction gamma, Monotonicity gamma_monotonicity,
                                SmoothFunction stab, bool stab_vanishes, double t0,
                                std::optional<SmoothFunction> exact_G) {
  if (!gamma.valid() || !stab.valid()) {
    throw PreconditionError("RateProfile::custom: gamma and stab evaluators required");
  }
  auto impl = std::make_shared<Impl>();
  impl->t0 = t0;
  impl->gamma = std::move(gamma);
  impl->gamma_mono = gamma_monotonicity;
  impl->stab = std::move(stab);
  impl->stab_vanishes = stab_vanishes;
  impl->exact_G = std::move(exact_G);
  const SmoothFunction& g = impl->gamma;
  impl->g_quad = std::make_unique<CumulativeIntegral>(
      [g](double t) {
        const double v = g(t);
        return v * v;
      },
      t0);
  return RateProfile(std::move(impl));
}

double RateProfile::t0() const { return impl_->t0; }
double RateProfile::gamma(double t) const { return impl_->gamma(t); }
double RateProfile::gamma_derivative(double t, int order) const {
  return impl_->gamma.derivative(t, order);
}
int RateProfile::gamma_max_order() const { return impl_->gamma.max_order(); }
Monotonicity RateProfile::gamma_monotonicity() const { return impl_->gamma_mono; }
double RateProfile::stab(double t) const { return impl_->stab(t); }
bool RateProfile::stab_vanishes() const { return impl_->stab_vanishes; }
std::optional<PowerForm> RateProfile::power_form() const { return impl_->form; }

namespace {

double power_G(double beta, double t0, double t) {
  if (beta == 0.5) return std::log(t / t0);
  const double p = 1.0 - 2.0 * beta;
  return (std::pow(t, p) - std::pow(t0, p)) / p;
}

// Closed-form running max of G*S for the power profile.  G*S is increasing
// up to an explicit critical time (possibly +inf) and non-increasing after.
double power_M(double beta, double alpha, double t0, double t) {
  auto gs = [&](double tau) { return power_G(beta, t0, tau) * std::pow(tau, alpha); };
  if (alpha == 0.0) return power_G(beta, t0, t);  // G itself, always non-decreasing
  if (beta == 0.5) {
    const double t_star = t0 * std::exp(-1.0 / alpha);
    return gs(std::min(t, t_star));
  }
  const double p = 1.0 - 2.0 * beta;
  const double q = p + alpha;
  if (q >= 0.0) return gs(t);  // increasing for all t >= t0
  const double t_star = std::pow(alpha * std::pow(t0, p) / q, 1.0 / p);
  return gs(std::min(t, std::max(t_star, t0)));
}

}  // namespace

double RateProfile::G(double t) const {
  const Impl& im = *impl_;
  if (t < im.t0) throw std::domain_error("RateProfile::G: t below t0");
  if (t == im.t0) return 0.0;
  if (im.form) return power_G(im.form->beta, im.t0, t);
  if (im.exact_G) return (*im.exact_G)(t);
  return im.g_quad->upto(t);
}

double RateProfile::M(double t) const {
  const Impl& im = *impl_;
  if (t < im.t0) throw std::domain_error("RateProfile::M: t below t0");
  if (t == im.t0) return 0.0;
  if (im.form) return power_M(im.form->beta, im.form->alpha, im.t0, t);

  {
    std::lock_guard<std::mutex> lock(im.m_mutex);
    auto it = im.m_cache.find(t);
    if (it != im.m_cache.end()) return it->second;
  }
  // Geometric grid (ratio 1.01), doubled until two successive refinements
  // agree to 1e-6 relative.  G*S for admissible profiles varies on
  // polynomial scales, so no fine oscillation is expected.
  double ratio = 1.01;
  double prev = -1.0;
  double value = 0.0;
  for (int pass = 0; pass < 24; ++pass) {
    double m = 0.0;
    double tau = im.t0;
    while (tau < t) {
      m = std::max(m, GS(tau));
      tau = std::max(tau * ratio, tau + (im.t0 > 0.0 ? 0.0 : 1e-6));
      if (tau > t) tau = t;
      m = std::max(m, GS(tau));
    }
    m = std::max(m, GS(t));
    value = m;
    if (prev >= 0.0 && std::abs(value - prev) <= 1e-6 * std::max(std::abs(value), 1e-300)) break;
    prev = value;
    ratio = std::sqrt(ratio);
    if (pass == 23) throw NumericError("RateProfile::M: grid refinement did not stabilize");
  }
  {
    std::lock_guard<std::mutex> lock(im.m_mutex);
    im.m_cache.emplace(t, value);
  }
  return value;
}

double RateProfile::derived_lambda3() const {
  const Impl& im = *impl_;
  if (im.form) {
    const double b = im.form->beta;
    const double t0 = im.t0;
    const double r1 = std::abs(b) / t0;
    const double r2 = std::abs(b * (b + 1.0)) / (t0 * t0);
    const double r3 = std::abs(b * (b + 1.0) * (b + 2.0)) / (t0 * t0 * t0);
    return std::max({r1, r2, r3});
  }
  if (im.gamma.max_order() < 3) {
    throw PreconditionError("derived_lambda3: gamma needs three derivatives");
  }
  double worst = 0.0;
  const double hi = im.t0 + 100.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = im.t0 + (hi - im.t0) * i / 2000.0;
    const double g = im.gamma(t);
    if (g <= 0.0) continue;
    for (int k = 1; k <= 3; ++k) {
      worst = std::max(worst, std::abs(im.gamma.derivative(t, k)) / g);
    }
  }
  return worst * 1.05;
}

void RateProfile::verify_lambda3(double lambda3, double t_hi, int n) const {
  const Impl& im = *impl_;
  if (im.gamma.max_order() < 3) {
    throw PreconditionError("verify_lambda3: gamma needs three derivatives");
  }
  for (int i = 0; i <= n; ++i) {
    const double t = im.t0 + (t_hi - im.t0) * i / n;
    const double g = im.gamma(t);
    for (int k = 1; k <= 3; ++k) {
      if (std::abs(im.gamma.derivative(t, k)) > lambda3 * g * (1.0 + 1e-12) + 1e-300) {
        throw PreconditionError("verify_lambda3: |gamma^(k)| <= lambda3*gamma fails on grid");
      }
    }
  }
}

SmoothFunction RateProfile::gamma_squared() const {
  if (impl_->form) return SmoothFunction::power(-2.0 * impl_->form->beta);
  return smooth_product(impl_->gamma, impl_->gamma);
}

Classification classify_power(double beta, double alpha) {
  if (alpha > 0.0) {
    throw PreconditionError("classify_power: alpha > 0 is out of scope");
  }
  if (alpha == 0.0 && beta == 0.5) {
    return {Classification::Kind::log_corrected, 0.0};
  }
  if (2.0 * beta >= 1.0 + alpha) {
    return {Classification::Kind::gec, 0.0};
  }
  return {Classification::Kind::growth, 0.5 * (1.0 + alpha) - beta};
}

std::pair<double, double> exp_growth_constants(const SmoothFunction& g, double lambda4, double t0,
                                               double precheck_span, int precheck_n) {
  if (!g.has_derivative(1)) {
    throw PreconditionError("exp_growth_constants: g needs a first derivative");
  }
  for (int i = 0; i <= precheck_n; ++i) {
    const double t = t0 + precheck_span * i / precheck_n;
    if (std::abs(g.derivative(t, 1)) > lambda4 * g(t) * (1.0 + 1e-12) + 1e-300) {
      throw PreconditionError("exp_growth_constants: |g'| <= lambda4*g fails on grid");
    }
  }
  const double G1 = integrate([&g](double t) { return g(t); }, t0, t0 + 1.0);
  double gamma1;
  if (G1 == 0.0) {
    gamma1 = lambda4;  // g vanishes on [t0, t0+1]
  } else {
    gamma1 = std::max(lambda4, g(t0 + 1.0) / G1);
  }
  return {gamma1, std::exp(gamma1)};
}

double osc_integral_bound(const std::function<double(double)>& g, double alpha, double beta,
                          double ell) {
  if (!(ell > 0.0)) throw std::domain_error("osc_integral_bound: need ell > 0");
  if (beta < alpha) throw std::domain_error("osc_integral_bound: need beta >= alpha");
  const double mass = integrate(g, alpha, beta);
  return 0.5 * mass - std::max(g(alpha), g(beta)) / ell;
}

OscIntegralCheck osc_integral_check(const std::function<double(double)>& g, double alpha,
                                    double beta, double ell, const QuadratureOptions& opts) {
  OscIntegralCheck out;
  out.bound = osc_integral_bound(g, alpha, beta, ell);
  out.integral = integrate(
      [&](double t) {
        const double s = std::sin(ell * t);
        return g(t) * s * s;
      },
      alpha, beta, opts);
  out.ok = out.integral >= out.bound - 1e-9 * std::max(1.0, std::abs(out.bound));
  return out;
}

}  // namespace wavegec::rates
