#pragma once

#include <array>
#include <functional>

namespace wavegec {

// A scalar function of time carrying closed-form evaluators for its first
// few derivatives.  Rate functions need three derivatives, modulations need
// three, generic test functions often just one.  Derivatives are assembled
// symbolically by the factory helpers, never by runtime differencing.
class SmoothFunction {
 public:
  using Eval = std::function<double(double)>;

  SmoothFunction() = default;
  explicit SmoothFunction(Eval f) : evals_{std::move(f), {}, {}, {}} {}
  SmoothFunction(Eval f, Eval d1) : evals_{std::move(f), std::move(d1), {}, {}} {}
  SmoothFunction(Eval f, Eval d1, Eval d2)
      : evals_{std::move(f), std::move(d1), std::move(d2), {}} {}
  SmoothFunction(Eval f, Eval d1, Eval d2, Eval d3)
      : evals_{std::move(f), std::move(d1), std::move(d2), std::move(d3)} {}

  bool valid() const { return static_cast<bool>(evals_[0]); }
  double operator()(double t) const { return evals_[0](t); }

  // order 0 returns the value itself; orders above max_order() throw.
  double derivative(double t, int order = 1) const;
  bool has_derivative(int order) const;
  int max_order() const;

  static SmoothFunction constant(double v);
  static SmoothFunction power(double exponent);                 // t^e on t > 0
  static SmoothFunction shifted_power(double exponent, double shift);
  static SmoothFunction exponential(double rate);               // exp(rate * t)

 private:
  std::array<Eval, 4> evals_{};
};

// Pointwise product with Leibniz-rule derivatives up to the common order.
SmoothFunction smooth_product(const SmoothFunction& a, const SmoothFunction& b);
SmoothFunction smooth_scale(const SmoothFunction& a, double s);

}  // namespace wavegec
