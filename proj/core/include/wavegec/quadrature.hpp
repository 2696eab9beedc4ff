#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <vector>

namespace wavegec {

// Adaptive Gauss-Kronrod 7-15 with interval bisection.  The defaults match
// the tolerances used throughout for cumulative rates and stabilization
// integrals, which enter exponents and therefore need error far below unit
// scale.
struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;
  int max_depth = 60;
  long long max_evals = 200'000'000;
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long long evals = 0;
};

IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opts = {});

// Convenience wrapper; throws NumericError when the tolerance is unreachable.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

// Monotone cumulative integral with a breakpoint cache, so that repeated
// queries along a grid pay only for the new span.  Thread-safe.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;
  CumulativeIntegral(std::function<double(double)> f, double origin, QuadratureOptions opts = {});

  double origin() const { return origin_; }
  double upto(double t) const;                   // integral from origin to t (t >= origin)
  double between(double t1, double t2) const;    // integral over [t1, t2]

 private:
  std::function<double(double)> f_;
  double origin_ = 0.0;
  QuadratureOptions opts_{};
  mutable std::map<double, double> cache_;       // t -> integral(origin, t)
  mutable std::mutex mutex_;
};

// Bisection for a continuous function with a sign change on [lo, hi].
// Runs a fixed number of halvings (enough to hit double resolution) unless
// the interval shrinks below abs_tol first.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double abs_tol = 0.0, int max_iter = 200);

// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace wavegec
