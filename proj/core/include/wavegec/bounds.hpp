#pragma once

#include <string>
#include <vector>

#include "wavegec/coefficients.hpp"
#include "wavegec/mode_dynamics.hpp"
#include "wavegec/rates.hpp"

namespace wavegec::bounds {

// H1 = 3 L2/L1 and H2 = max{2 sqrt(L2-L1)/L1^2, sqrt(2 L1+3)/L1^(3/2)} for
// non-decreasing rates; H3 = max{3 L2/L1, exp(gamma(t0) S(t0)/(2 L1^2))} and
// H4 = sqrt(2 L1+3)/L1^(3/2) for non-increasing ones.
struct TheoremConstants {
  double h1, h2, h3, h4;
};

TheoremConstants theorem_constants(const rates::ClassParams& params,
                                   const rates::RateProfile& profile);

// exp(lambda * stab_integral / sqrt(Lambda1))
double kow_factor(double lambda, double stab_integral, const rates::ClassParams& params);
// exp((2 Lambda1 + 3) * delta_G / (4 Lambda1^(5/2) lambda))
double tar_factor(double lambda, double delta_G, const rates::ClassParams& params);

// (3 Lambda2/Lambda1) * exp(tar exponent on [a, b_switch] + kow exponent on
// [b_switch, c_end]); the degenerate switches b_switch == a or c_end are
// allowed.  Throws PreconditionError when the Tarama form is not admissible
// on [a, b_switch].
double mixed_factor(double a, double b_switch, double c_end, double lambda,
                    const rates::RateProfile& profile, const coefficients::Coefficient& coeff,
                    const rates::ClassParams& params);

struct SwitchPlan {
  enum class Branch { small_frequency, large_t1, large_t2, non_increasing_t1 };
  Branch branch;
  double switch_time;    // t1 or t2 (t0 for the small-frequency branch)
  double tar_exponent;   // contribution of the Tarama leg
  double kow_exponent;   // contribution of the Kowaleskian leg
  double factor;         // composed multiplicative bound for E(t)/E(t0)
};

// The frequency-dependent case split behind the growth theorem: the
// small-frequency branch below gamma(t0)/(2 Lambda1^(3/2)); otherwise the
// switch time found by bisection, balancing the two exponents.
SwitchPlan select_switch(double t, double lambda, const rates::RateProfile& profile,
                         const coefficients::Coefficient& coeff,
                         const rates::ClassParams& params);

double upper_envelope(double t, const rates::ClassParams& params,
                      const rates::RateProfile& profile);
double lower_envelope(double t, const rates::ClassParams& params,
                      const rates::RateProfile& profile);
// log variants; the envelope itself overflows for fast-growing rates.
double log_upper_envelope(double t, const rates::ClassParams& params,
                          const rates::RateProfile& profile);
double log_lower_envelope(double t, const rates::ClassParams& params,
                          const rates::RateProfile& profile);

struct SweepGrid {
  std::vector<double> lambdas;
  std::vector<double> times;  // strictly increasing, times.front() >= t0
  double slack = 0.05;
};

SweepGrid default_sweep(const rates::ClassParams& params, double lambda_lo, double lambda_hi,
                        int lambda_n, double t_hi, int t_n);

struct BoundRow {
  double lambda = 0.0;
  double t = 0.0;
  double sqrt_M = 0.0;
  double ratio = 0.0;       // E_kow(t) / E_kow(t0)
  double env_upper = 0.0;
  double env_lower = 0.0;
  double margin = 0.0;      // min log-distance to the slack-adjusted envelopes
  bool pass = false;
  int dataset = 0;
};

struct BoundReport {
  std::vector<BoundRow> rows;
  double worst_margin = 0.0;
  bool all_pass = false;
  double max_saturation = 0.0;  // max ratio / upper envelope over the sweep
  coefficients::MembershipReport gate;
  std::string note;
};

// Integrates both canonical data sets for every frequency in the grid and
// checks the measured energy ratio against the two envelopes with the given
// slack.  Refuses (throws MembershipError) when the coefficient fails the
// class-membership gate.  Tasks fan out one per (lambda, dataset) pair; the
// report is assembled in deterministic order regardless of workers.
BoundReport certify(const coefficients::Coefficient& coeff, const rates::RateProfile& profile,
                    const rates::ClassParams& params, const SweepGrid& grid,
                    const mode_dynamics::IntegratorConfig& icfg, int workers = 0);

// First grid time from which the classical hyperbolic factor
// exp(integral of gamma / Lambda1) stays below the growth envelope; compares
// exponents in log space.  Returns +inf when dominance never sets in on the
// grid.
double non_optimality_crossover(const rates::RateProfile& profile,
                                const rates::ClassParams& params, double t_hi, int n);

}  // namespace wavegec::bounds
