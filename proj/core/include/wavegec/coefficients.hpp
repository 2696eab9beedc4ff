#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wavegec/rates.hpp"
#include "wavegec/smooth_function.hpp"

namespace wavegec::coefficients {

// Compactly supported plateau function: 0 outside (a, b), 1 on
// [a + w, b - w], polynomial smoothstep ramps of width w (default 1).
// Three continuous derivatives everywhere; all of |theta|..|theta'''|
// stay below 100 for w >= 1.
class CutoffShape {
 public:
  CutoffShape() = default;
  CutoffShape(double a, double b, double ramp_width);

  double a() const { return a_; }
  double b() const { return b_; }
  double ramp_width() const { return w_; }
  double value(double t) const;
  double derivative(double t, int order) const;  // order 1..3
  double max_abs(int order, int grid_n = 10000) const;

  SmoothFunction as_function() const;

 private:
  double a_ = 0.0, b_ = 0.0, w_ = 1.0;
};

// Throws std::invalid_argument when b - a < 3.  Widens the ramps if any
// derivative bound were to exceed 100 (does not trigger for the smoothstep
// used here; the check runs anyway).
CutoffShape make_cutoff(double a, double b);

// Resonant modulation eps(t) = eps0 * theta(t) * gamma(t)^2 / lambda.
struct Modulation {
  double eps0 = 0.0;
  double lambda = 1.0;
  CutoffShape theta;
  SmoothFunction gamma_sq;

  SmoothFunction as_function() const;
};

Modulation make_modulation(double eps0, double lambda, CutoffShape theta, SmoothFunction gamma_sq);

enum class CoeffKind { constant, no_way, dgcs, glued };

enum class TailKind {
  zero,       // c == c_inf outside a bounded set of intervals
  divergent,  // integral of |c - c_inf| diverges
  unknown,    // no tail metadata; membership checks refuse
};

// Serializable description of the gamma^2 factor inside a modulated block.
struct GammaSqDesc {
  bool is_power = false;
  double beta = 0.0;  // gamma = t^-beta
};

struct BlockDesc {
  double m = 1.0;
  double lambda = 1.0;
  double a = 0.0;
  double b = std::numeric_limits<double>::infinity();
  double ramp_width = 1.0;
  bool eps_is_constant = false;
  double eps_value = 0.0;  // for constant eps
  double eps0 = 0.0;       // for modulated eps
  GammaSqDesc gamma_sq;
  long long phase_n_b = 0;   // m*lambda*b = 2*pi*phase_n_b when nonzero
  long long phase_k0_a = 0;  // m*lambda*a = 2*pi*phase_k0_a when nonzero
  bool serializable = false;
};

// Frozen slow-part evaluation of a block at envelope time tau and explicit
// oscillation phase phi = m*lambda*t; used for worst-phase scans where the
// oscillation count makes dense time grids impossible.
struct PhasePoint {
  double c, c1, c2;
};

struct MembershipReport {
  bool hyperbolicity = false;
  bool derivative_bounds = false;
  bool stabilization = false;
  double margin_hyp = 0.0;   // min over grid of min(c - L1, L2 - c)
  double margin_der = 0.0;   // min over grid of min(gamma - |c'|, gamma^2 - |c''|)
  double margin_stab = 0.0;  // min over grid of S(t) - tail(t)
  bool pass() const { return hyperbolicity && derivative_bounds && stabilization; }
};

// A propagation speed c(t) with symbolically assembled first and second
// derivatives, stabilization-support metadata, and certified tail bounds.
// Value type; cheap to copy and safe to share across threads.
class Coefficient {
 public:
  Coefficient() = default;

  double value(double t) const;
  double deriv1(double t) const;
  double deriv2(double t) const;

  CoeffKind kind() const;
  double domain_start() const;
  double c_inf() const;
  double upper_bound() const;  // certified sup of c over the domain
  double lower_bound() const;
  TailKind tail_kind() const;

  const std::vector<BlockDesc>& blocks() const;

  // Certified upper bound for the integral of |c - c_inf| over [t, +inf);
  // +inf for divergent tails.
  double tail_upper(double t) const;
  // Upper bound over a finite window.
  double abs_dev_upper(double t1, double t2) const;
  // Accurate value via per-oscillation tables; throws ResourceError when the
  // window holds too many oscillations to tabulate.
  double abs_dev_integral(double t1, double t2) const;

  // Worst-case |c - L| style scans need phase access inside blocks.
  bool in_block(double t, size_t* index = nullptr) const;
  PhasePoint eval_phase(size_t block_index, double tau, double phi) const;
  PhasePoint eval_exact(double t) const;  // (c, c', c'') at t

  struct Impl;  // opaque

 private:
  std::shared_ptr<const Impl> impl_;
  explicit Coefficient(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  friend Coefficient make_constant(double c_inf);
  friend Coefficient make_no_way();
  friend Coefficient make_dgcs(double m, double lambda, const SmoothFunction& eps,
                               double domain_start);
  friend Coefficient make_dgcs(double m, double lambda, const Modulation& eps);
  friend Coefficient make_dgcs(double m, double lambda, double eps_const, double domain_start);
  friend Coefficient glue_blocks(double c_inf, double domain_start,
                                 std::vector<std::pair<BlockDesc, SmoothFunction>> blocks);
};

// c == c_inf with zero derivatives and empty support.
Coefficient make_constant(double c_inf);

// The explicit speed 1 - sin(2t)/(4t) + sin^2(t)/(8t^2) - sin^4(t)/(64t^2)
// on [1, +inf); its stabilization integral grows like log t.
Coefficient make_no_way();

// c(t) = m^2 - eps(t) sin(2 m lambda t)/(4 m lambda)
//            - eps'(t) sin^2(m lambda t)/(8 m^2 lambda^2)
//            - eps(t)^2 sin^4(m lambda t)/(64 m^4 lambda^2).
Coefficient make_dgcs(double m, double lambda, const SmoothFunction& eps, double domain_start);
Coefficient make_dgcs(double m, double lambda, const Modulation& eps);
Coefficient make_dgcs(double m, double lambda, double eps_const, double domain_start);

// Concatenation used by the iterated construction: c == c_inf between blocks.
Coefficient glue_blocks(double c_inf, double domain_start,
                        std::vector<std::pair<BlockDesc, SmoothFunction>> blocks);

// Checks the three class conditions on a grid over [t0, horizon]: bounds
// Lambda1 <= c <= Lambda2, derivative bounds by gamma and gamma^2, and the
// stabilization tail against S.  Inside oscillatory blocks each grid time is
// scanned over a full phase revolution with frozen slow parts.
MembershipReport verify_membership(const Coefficient& coeff, const rates::RateProfile& profile,
                                   const rates::ClassParams& params, double horizon,
                                   int grid_n = 2048);

struct Gamma3Result {
  double gamma3_empirical = 0.0;
  bool pass = false;
};

// Grid maximum of max{lambda^2 |c - m^2|, lambda |c'|, |c''|} / (eps0 * g)
// over the support of the block, phases scanned at each envelope time.
// Points where g vanishes are excluded (there c == m^2 by construction).
Gamma3Result computation_bound_check(const Coefficient& coeff, const SmoothFunction& g,
                                     double lambda, double eps0, double m, int envelope_n = 512,
                                     int phase_n = 64);

}  // namespace wavegec::coefficients
