#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "wavegec/bounds.hpp"
#include "wavegec/coefficients.hpp"
#include "wavegec/mode_dynamics.hpp"
#include "wavegec/rates.hpp"

namespace wavegec::counterexample {

// Constants shared by every block of one construction: the rate-derivative
// control Lambda3, its doubling Lambda4 for the squared rate, the growth
// constants (Gamma1, Gamma2) of the cumulative rate, the cutoff bound
// Lambda5 = 100, Lambda6 = 6 Lambda3^2 + 2 Lambda3 for g = gamma^2, and the
// computation-bound constant Gamma3 (filled once per construction).
struct LemmaConstants {
  double lambda3 = 0.0;
  double lambda4 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double lambda5 = 100.0;
  double lambda6 = 0.0;
  double gamma3 = 0.0;
};

LemmaConstants lemma_constants(const rates::RateProfile& profile,
                               const rates::ClassParams& params);

struct ActivationOptions {
  double lambda0 = 0.0;          // spectrum threshold
  double ode_cap = 1e7;          // lambda * span budget for ODE verification
  double horizon_cap = 1e15;     // desk-scale limit for the hitting-time search
  bool ode_check = true;         // cross-validate the closed form by stepping
  mode_dynamics::IntegratorConfig icfg{};
};

struct ActivationBlock {
  double A = 0.0, L = 0.0, Lambda = 0.0;  // inputs
  double a = 0.0, b = 0.0;
  double lambda = 0.0;
  double eps0 = 0.0;
  double m = 0.0;  // sqrt(c_inf)
  long long n_b = 0, k0_a = 0;            // m*lambda*b = 2*pi*n_b, m*lambda*a = 2*pi*k0_a
  coefficients::CutoffShape theta;
  coefficients::Coefficient coeff;        // c_inf outside (a, b)
  double M_b = 0.0;
  double H14 = 0.0;
  double gamma3 = 0.0;
  double pump_lo = 0.0, pump_hi = 0.0;    // bracket for int eps sin^2 over [a, b]
  double mass_upper = 0.0;                // upper bound for int |c - c_inf| over (a, b)
};

struct CheckRecord {
  bool pass = false;
  double margin = 0.0;
};

struct BlockVerification {
  CheckRecord m_growth;        // M(b) >= L * M(A)
  CheckRecord support;         // c == c_inf at and outside {a, b}
  CheckRecord hyperbolicity;
  CheckRecord derivatives;
  CheckRecord stabilization;   // int |c - c_inf| <= S(b)/2
  CheckRecord energy;          // u'(b)^2 >= (sqrt(c_inf)/2) exp(H14 sqrt(M(b)))
  CheckRecord lambda_sandwich;
  CheckRecord lambda_vs_gamma; // lambda^2 >= gamma^2 on [A, b]
  CheckRecord congruence;      // m*lambda*a and m*lambda*b in 2*pi*Z
  std::optional<double> ode_rel_dev;  // closed form vs stepping at b, when feasible
  bool pass() const {
    return m_growth.pass && support.pass && hyperbolicity.pass && derivatives.pass &&
           stabilization.pass && energy.pass && lambda_sandwich.pass && lambda_vs_gamma.pass &&
           congruence.pass;
  }
};

// Hitting-time search for the block end: b = min{t : G(t) S(t) >= r} with r
// grown geometrically until every side condition holds.  Throws
// GecClassError when G*S is bounded, ResourceError past the horizon cap.
double choose_b(double A, double L, double Lambda, const rates::RateProfile& profile,
                const rates::ClassParams& params, const LemmaConstants& lc,
                const ActivationOptions& opts = {});

// lambda = (2 pi / (m b)) * floor(sqrt(G(b)/S(b)) * m b / (2 pi)); the floor
// makes m*lambda*b an exact multiple of 2*pi and keeps lambda within a
// factor 2 of sqrt(G/S).
std::pair<double, long long> choose_lambda(double b, const rates::RateProfile& profile, double m);

// First multiple of 2*pi/(m*lambda) inside [A, A+1].
std::pair<double, long long> choose_a(double A, double m, double lambda);

// eps0 = min{(Lambda2-Lambda1)/(2 Gamma3), 1/(8 Gamma3), 4 m^3 log 2}.
double choose_eps0(const rates::ClassParams& params, double gamma3, double m);

std::pair<ActivationBlock, BlockVerification> activation_step(
    double A, double L, double Lambda, const rates::RateProfile& profile,
    const rates::ClassParams& params, const ActivationOptions& opts = {},
    const LemmaConstants* shared = nullptr);

struct ScheduleOptions {
  int K_cap = 3;
  double lambda0 = 0.0;
  double ode_cap = 1e7;
  double horizon = 0.0;          // 0: defaults to just past the last block
  double a_search_ratio = 1.05;  // geometric grid for the next window start
  bool ode_check = true;
  mode_dynamics::IntegratorConfig icfg{};
};

struct Schedule {
  Schedule(const rates::ClassParams& p, const rates::RateProfile& pr) : params(p), profile(pr) {}

  rates::ClassParams params;
  rates::RateProfile profile;
  std::vector<ActivationBlock> blocks;           // k = 1..K
  std::vector<BlockVerification> block_checks;
  std::vector<double> window_starts;             // A_k
  coefficients::Coefficient glued;
  coefficients::MembershipReport membership;     // glued coefficient on [t0, horizon]
  double horizon = 0.0;
  double H5 = 0.0, H14 = 0.0, H15 = 0.0, H16 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0, eps0 = 0.0;
  bool truncated = false;
  std::string note;
};

Schedule build_schedule(int K, const rates::RateProfile& profile,
                        const rates::ClassParams& params, const ScheduleOptions& opts = {});

// Two-sided certified energy value; exact results have hi - lo at rounding
// scale, stabilization-bounded block crossings widen it.
struct EnergyInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Energy of the mode launched with data (u, u') = (0, c_inf^(1/4)) at a_j,
// evaluated at the requested times.  Constant spans propagate by exact
// rotation, block interiors by capped ODE stepping or the closed form at the
// block's own frequency, and otherwise by the two-sided Kowaleskian bound
// with the block's certified stabilization mass.
std::vector<EnergyInterval> mode_energies(const Schedule& schedule, int anchor_k, double lambda,
                                          const std::vector<double>& times,
                                          const mode_dynamics::IntegratorConfig& icfg,
                                          double ode_cap);

struct Band {
  int k = 0;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  bool singleton = true;
  std::string note;
  // (lambda, E(b_k)/E_k(b_k), E(t0)/E_k(t0)) for the verified sample points.
  std::vector<std::array<double, 3>> samples;
};

// Maximal frequency band [lambda_k, lambda_hat] on a halving search such
// that five interior samples keep at least half the block-end energy and at
// most twice the initial energy.  Falls back to the singleton {lambda_k}
// when the sampling budget or the band collapses.
Band band_search(int k, const Schedule& schedule, const mode_dynamics::IntegratorConfig& icfg,
                 double ode_cap = 1e7, double budget_steps = 2e8);

// Superposition energy of the finite spectral sample at time t.  Cluster k
// is normalized by 1/(k^2 E_k(t0) mass_k); at t = t0 each cluster term is
// 1/k^2 by construction.
EnergyInterval superposition_energy(const Schedule& schedule, const std::vector<Band>& bands,
                                    double t, const mode_dynamics::IntegratorConfig& icfg,
                                    double ode_cap = 1e7);

struct GrowthRow {
  int k = 0;
  double A_k = 0.0, a_k = 0.0, b_k = 0.0, lambda_k = 0.0;
  double M_b = 0.0;
  EnergyInterval E_b;        // E_k(b_k)
  EnergyInterval E_t0;       // E_k(t0)
  EnergyInterval Eu_b;       // superposition energy at b_k
  bool ekbk_ok = false;      // E_k(b_k) >= exp(H14 sqrt(M(b_k)))/2
  bool ekt0_ok = false;      // E_k(t0) <= H15 exp(H16 sqrt(M(A_k)))
  bool cluster_ok = false;   // Eu(b_k) >= E_k(b_k)/(2 k^2 E_k(t0))
  int direct_status = 0;     // +1 pass, 0 inconclusive, -1 fail
  double direct_margin_log = 0.0;
  double envelope_log = 0.0;  // log(Eu(t0)) + H5 sqrt(M(b_k))
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  double Eu_t0 = 0.0;
  double pi2_over_3_ok = false;  // Eu(t0) <= pi^2/3
  int k_min_empirical = 0;       // first k from which the direct check passes onward
  long long k_min_analytic = 0;  // from the arithmetic growth chain
  bool chain_ok_at_kmin = false;
  std::string note;
};

GrowthReport verify_growth(const Schedule& schedule, const std::vector<Band>& bands,
                           const mode_dynamics::IntegratorConfig& icfg, double ode_cap = 1e7);

}  // namespace wavegec::counterexample
