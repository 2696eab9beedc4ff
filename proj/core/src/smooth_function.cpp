#include "wavegec/smooth_function.hpp"

#include <cmath>
#include <stdexcept>

namespace wavegec {

double SmoothFunction::derivative(double t, int order) const {
  if (order < 0 || order > 3 || !evals_[static_cast<size_t>(order)]) {
    throw std::out_of_range("SmoothFunction: derivative order not available");
  }
  return evals_[static_cast<size_t>(order)](t);
}

bool SmoothFunction::has_derivative(int order) const {
  return order >= 0 && order <= 3 && static_cast<bool>(evals_[static_cast<size_t>(order)]);
}

int SmoothFunction::max_order() const {
  int m = -1;
  for (int i = 0; i <= 3; ++i) {
    if (!evals_[static_cast<size_t>(i)]) break;
    m = i;
  }
  return m;
}

SmoothFunction SmoothFunction::constant(double v) {
  auto zero = [](double) { return 0.0; };
  return SmoothFunction([v](double) { return v; }, zero, zero, zero);
}

SmoothFunction SmoothFunction::power(double e) {
  if (e == 0.0) return constant(1.0);
  return SmoothFunction(
      [e](double t) { return std::pow(t, e); },
      [e](double t) { return e * std::pow(t, e - 1.0); },
      [e](double t) { return e * (e - 1.0) * std::pow(t, e - 2.0); },
      [e](double t) { return e * (e - 1.0) * (e - 2.0) * std::pow(t, e - 3.0); });
}

SmoothFunction SmoothFunction::shifted_power(double e, double s) {
  if (e == 0.0) return constant(1.0);
  return SmoothFunction(
      [e, s](double t) { return std::pow(t + s, e); },
      [e, s](double t) { return e * std::pow(t + s, e - 1.0); },
      [e, s](double t) { return e * (e - 1.0) * std::pow(t + s, e - 2.0); },
      [e, s](double t) { return e * (e - 1.0) * (e - 2.0) * std::pow(t + s, e - 3.0); });
}

SmoothFunction SmoothFunction::exponential(double r) {
  return SmoothFunction(
      [r](double t) { return std::exp(r * t); },
      [r](double t) { return r * std::exp(r * t); },
      [r](double t) { return r * r * std::exp(r * t); },
      [r](double t) { return r * r * r * std::exp(r * t); });
}

SmoothFunction smooth_product(const SmoothFunction& a, const SmoothFunction& b) {
  int order = std::min(a.max_order(), b.max_order());
  SmoothFunction::Eval f = [a, b](double t) { return a(t) * b(t); };
  SmoothFunction::Eval d1, d2, d3;
  if (order >= 1) {
    d1 = [a, b](double t) { return a.derivative(t, 1) * b(t) + a(t) * b.derivative(t, 1); };
  }
  if (order >= 2) {
    d2 = [a, b](double t) {
      return a.derivative(t, 2) * b(t) + 2.0 * a.derivative(t, 1) * b.derivative(t, 1) +
             a(t) * b.derivative(t, 2);
    };
  }
  if (order >= 3) {
    d3 = [a, b](double t) {
      return a.derivative(t, 3) * b(t) + 3.0 * a.derivative(t, 2) * b.derivative(t, 1) +
             3.0 * a.derivative(t, 1) * b.derivative(t, 2) + a(t) * b.derivative(t, 3);
    };
  }
  return SmoothFunction(std::move(f), std::move(d1), std::move(d2), std::move(d3));
}

SmoothFunction smooth_scale(const SmoothFunction& a, double s) {
  return smooth_product(a, SmoothFunction::constant(s));
}

}  // namespace wavegec
