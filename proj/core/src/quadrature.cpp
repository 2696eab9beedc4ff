#include "wavegec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavegec/errors.hpp"

namespace wavegec {
namespace {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule,
// on [-1, 1].
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
  double value;
  double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  fv[7] = f(c);
  for (int i = 0; i < 7; ++i) {
    const double x = h * kKronrodNodes[i];
    fv[i] = f(c - x);
    fv[14 - i] = f(c + x);
  }
  double kron = kKronrodWeights[7] * fv[7];
  double gauss = kGaussWeights[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kron += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (fv[i] + fv[14 - i]);
  }
  const double mean = 0.5 * kron;
  // resasc: scale of the integrand's variation, as in QUADPACK's qk15.
  double resasc = kKronrodWeights[7] * std::abs(fv[7] - mean);
  for (int i = 0; i < 7; ++i) {
    resasc += kKronrodWeights[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));
  }
  resasc *= std::abs(h);
  kron *= h;
  gauss *= h;
  double err = std::abs(kron - gauss);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  return {kron, std::max(err, std::abs(kron) * 5e-17)};
}

struct AdaptiveState {
  const std::function<double(double)>& f;
  const QuadratureOptions& opts;
  long long evals = 0;
};

Panel refine(AdaptiveState& st, double a, double b, Panel p, double tol, int depth) {
  if (p.error <= tol) return p;
  if (depth >= st.opts.max_depth) {
    if (p.error <= tol * 1e3) return p;
    throw NumericError("quadrature: did not converge (max depth reached)");
  }
  st.evals += 30;
  if (st.evals > st.opts.max_evals) {
    throw NumericError("quadrature: evaluation budget exceeded");
  }
  const double c = 0.5 * (a + b);
  Panel left = refine(st, a, c, gk15(st.f, a, c), 0.5 * tol, depth + 1);
  Panel right = refine(st, c, b, gk15(st.f, c, b), 0.5 * tol, depth + 1);
  return {left.value + right.value, left.error + right.error};
}

}  // namespace

IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opts) {
  if (a == b) return {0.0, 0.0, 0};
  double sign = 1.0;
  double lo = a, hi = b;
  if (hi < lo) {
    std::swap(lo, hi);
    sign = -1.0;
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw PreconditionError("quadrature: non-finite interval");
  }
  AdaptiveState st{f, opts};
  Panel whole = gk15(f, lo, hi);
  st.evals = 15;
  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(whole.value));
  Panel out = refine(st, lo, hi, whole, tol, 0);
  return {sign * out.value, out.error, st.evals};
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  return integrate_adaptive(f, a, b, opts).value;
}

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> f, double origin,
                                       QuadratureOptions opts)
    : f_(std::move(f)), origin_(origin), opts_(opts) {
  cache_.emplace(origin_, 0.0);
}

double CumulativeIntegral::upto(double t) const {
  if (t < origin_) throw std::domain_error("CumulativeIntegral: t below origin");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.lower_bound(t);
  if (it != cache_.end() && it->first == t) return it->second;
  // Integrate from the nearest cached point below t.
  auto below = it == cache_.begin() ? cache_.begin() : std::prev(it);
  const double base_t = below->first;
  const double base_v = below->second;
  const double inc = integrate(f_, base_t, t, opts_);
  const double v = base_v + inc;
  cache_.emplace_hint(it, t, v);
  return v;
}

double CumulativeIntegral::between(double t1, double t2) const {
  if (t2 < t1) return -between(t2, t1);
  return upto(t2) - upto(t1);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
              int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw PreconditionError("bisect: root not bracketed");
  }
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= abs_tol) break;
  }
  return 0.5 * (lo + hi);
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw PreconditionError("regression_slope: need matched samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace wavegec
