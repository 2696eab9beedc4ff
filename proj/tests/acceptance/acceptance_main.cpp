// Acceptance suite: one checkable criterion per entry, each printing a
// single PASS/FAIL line.  Run all with no arguments or one with
// --criterion N.  Non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "support/oracles.hpp"
#include "wavegec/bounds.hpp"
#include "wavegec/counterexample.hpp"
#include "wavegec/serialization.hpp"

using namespace wavegec;
namespace cex = wavegec::counterexample;
using coefficients::Coefficient;
using rates::ClassParams;
using rates::RateProfile;

namespace {

constexpr double kPi = std::numbers::pi;

struct Criterion {
  int id;
  const char* title;
  std::function<bool(std::string&)> run;
};

// Shared fixtures for the pinned acceptance class.
const ClassParams& acc_params() {
  static const ClassParams p = ClassParams::make(1.0, 1.0, 4.0);
  return p;
}
const RateProfile& acc_profile() {
  static const RateProfile p = RateProfile::power(0.2, -0.2, 1.0);
  return p;
}

const cex::ActivationBlock& acc_block() {
  static const cex::ActivationBlock blk = [] {
    cex::ActivationOptions opts;
    auto [b, v] = cex::activation_step(10.0, 4.0, 0.0, acc_profile(), acc_params(), opts);
    (void)v;
    return b;
  }();
  return blk;
}

const cex::Schedule& acc_schedule() {
  static const cex::Schedule sched = [] {
    cex::ScheduleOptions opts;
    return cex::build_schedule(2, acc_profile(), acc_params(), opts);
  }();
  return sched;
}

// ---------------------------------------------------------------------------

bool criterion1(std::string& detail) {
  // Residuals of both closed-form pairs under 5-point differentiation.
  const testing::ClosedFormSampler dgcs(1.0, 50.0, SmoothFunction::constant(0.1), 0.0);
  const Coefficient c_dgcs = coefficients::make_dgcs(1.0, 50.0, 0.1, 0.0);
  double worst_dgcs = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = 0.05 + (9.9 - 0.05) * i / 999.0;
    worst_dgcs = std::max(worst_dgcs,
                          testing::ode_residual([&](double s) { return dgcs.w(s); },
                                                [&](double s) { return c_dgcs.value(s); }, 50.0, t,
                                                4e-4, dgcs.amplitude(t)));
  }

  SmoothFunction inv_t([](double s) { return 1.0 / s; });
  const testing::ClosedFormSampler easy(1.0, 1.0, inv_t, 1.0);
  const Coefficient c_easy = coefficients::make_no_way();
  double worst_easy = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = 1.1 + (99.9 - 1.1) * i / 999.0;
    worst_easy = std::max(worst_easy,
                          testing::ode_residual([&](double s) { return easy.w(s); },
                                                [&](double s) { return c_easy.value(s); }, 1.0, t,
                                                0.012, easy.amplitude(t)));
  }
  std::ostringstream ss;
  ss << "max residual resonant pair " << worst_dgcs << ", explicit pair " << worst_easy;
  detail = ss.str();
  return worst_dgcs <= 1e-8 && worst_easy <= 1e-8;
}

bool criterion2(std::string& detail) {
  // The stepped solution reproduces both closed forms at the right endpoint.
  const Coefficient c_dgcs = coefficients::make_dgcs(1.0, 50.0, 0.1, 0.0);
  auto [w0, wp0] = mode_dynamics::closed_form_dgcs(1.0, 50.0, SmoothFunction::constant(0.1), 0.0, 0.0);
  const mode_dynamics::ModeState end_dgcs =
      mode_dynamics::integrate_to(c_dgcs, 50.0, {0.0, w0, wp0, 50.0}, 10.0);
  auto [w1, wp1] = mode_dynamics::closed_form_dgcs(1.0, 50.0, SmoothFunction::constant(0.1), 0.0, 10.0);
  const double scale1 = std::sqrt(w1 * w1 + wp1 * wp1 / 2500.0);
  const double dev1 = std::max(std::abs(end_dgcs.u - w1) / scale1,
                               std::abs(end_dgcs.v - wp1) / (50.0 * scale1));

  const Coefficient c_easy = coefficients::make_no_way();
  auto [e0, ep0] = mode_dynamics::closed_form_no_way(1.0);
  const mode_dynamics::ModeState end_easy =
      mode_dynamics::integrate_to(c_easy, 1.0, {1.0, e0, ep0, 1.0}, 100.0);
  auto [e1, ep1] = mode_dynamics::closed_form_no_way(100.0);
  const double scale2 = std::sqrt(e1 * e1 + ep1 * ep1);
  const double dev2 = std::max(std::abs(end_easy.u - e1), std::abs(end_easy.v - ep1)) / scale2;

  std::ostringstream ss;
  ss << "endpoint deviation resonant " << dev1 << ", explicit " << dev2;
  detail = ss.str();
  return dev1 <= 1e-6 && dev2 <= 1e-6;
}

bool criterion3(std::string& detail) {
  // Energy of the explicit example grows like t^(1/8); its deviation
  // integral grows like log t with the mean-of-|sin| constant.
  SmoothFunction inv_t([](double s) { return 1.0 / s; });
  const testing::ClosedFormSampler easy(1.0, 1.0, inv_t, 1.0);
  std::vector<double> log_t, log_e;
  for (double t : testing::logspace(1e2, 1e4, 200)) {
    const double w = easy.w(t);
    const double wp = easy.wp(t);
    log_t.push_back(std::log(t));
    log_e.push_back(std::log(wp * wp + w * w));
  }
  const double slope_energy = regression_slope(log_t, log_e);

  const Coefficient c = coefficients::make_no_way();
  std::vector<double> log_T, mass;
  for (double T : testing::logspace(1e2, 1e4, 10)) {
    log_T.push_back(std::log(T));
    mass.push_back(c.abs_dev_integral(1.0, T));
  }
  const double slope_mass = regression_slope(log_T, mass);
  const double expected_mass_slope = 1.0 / (2.0 * kPi);

  std::ostringstream ss;
  ss << "energy slope " << slope_energy << " (want 1/8 +- 0.02), deviation slope " << slope_mass
     << " vs " << expected_mass_slope;
  detail = ss.str();
  return std::abs(slope_energy - 0.125) <= 0.02 &&
         std::abs(slope_mass - expected_mass_slope) <= 0.2 * expected_mass_slope;
}

bool criterion4(std::string& detail) {
  // Envelope certification sweeps for the constant speed, one activation
  // block, and the two-block concatenation, all in the pinned class.
  const ClassParams& params = acc_params();
  const RateProfile& profile = acc_profile();
  const double h1_pinned = 12.0;
  const double h2_pinned = 2.0 * std::sqrt(3.0);

  const Coefficient constant = coefficients::make_constant(params.c_inf);
  const Coefficient block = acc_block().coeff;
  const Coefficient glued = acc_schedule().glued;
  const double t_hi = acc_block().b * 1.2;

  std::ostringstream ss;
  bool ok = true;
  for (const auto& [name, coeff] :
       std::vector<std::pair<std::string, Coefficient>>{
           {"constant", constant}, {"block", block}, {"schedule", glued}}) {
    bounds::SweepGrid grid = bounds::default_sweep(params, 1e-2, 1e2, 20, t_hi, 30);
    grid.slack = 0.05;
    const bounds::BoundReport report = bounds::certify(coeff, profile, params, grid, {}, 0);
    bool pinned_ok = true;
    for (const auto& row : report.rows) {
      const double log_ratio = std::log(row.ratio);
      const double pinned_log = std::log(h1_pinned) + h2_pinned * row.sqrt_M;
      pinned_ok = pinned_ok && log_ratio <= pinned_log + std::log(1.05) &&
                  log_ratio >= -pinned_log - std::log(1.05);
    }
    ok = ok && report.all_pass && pinned_ok;
    ss << name << " worst_margin=" << report.worst_margin
       << " saturation=" << report.max_saturation << (report.all_pass ? " pass; " : " FAIL; ");
  }
  detail = ss.str();
  return ok;
}

bool criterion5(std::string& detail) {
  // The four statement checks of the activation step, energy by the
  // closed-form oracle plus the stepping cross-check.
  cex::ActivationOptions opts;
  auto [blk, ver] = cex::activation_step(10.0, 4.0, 0.0, acc_profile(), acc_params(), opts);
  const cex::LemmaConstants lc = cex::lemma_constants(acc_profile(), acc_params());
  const double h14_expected = blk.eps0 / (16.0 * acc_params().c_inf * lc.gamma2);
  const bool h14_ok = std::abs(blk.H14 / h14_expected - 1.0) <= 1e-12;
  const bool m_ok = blk.M_b >= 4.0 * acc_profile().M(10.0) * (1.0 - 1e-12);
  const bool ode_ok = ver.ode_rel_dev.has_value() && *ver.ode_rel_dev <= 1e-6;

  std::ostringstream ss;
  ss << "b=" << blk.b << " lambda=" << blk.lambda << " eps0=" << blk.eps0
     << " H14=" << blk.H14 << " energy_margin_log=" << ver.energy.margin << " stab_margin="
     << ver.stabilization.margin << " ode_dev=" << (ver.ode_rel_dev ? *ver.ode_rel_dev : -1.0);
  detail = ss.str();
  return ver.pass() && h14_ok && m_ok && ode_ok;
}

bool criterion6(std::string& detail) {
  // Two-block concatenation: structure, membership with the telescoped tail,
  // and the growth of the superposition against exp(H5 sqrt(M(b_k))).
  const cex::Schedule& sched = acc_schedule();
  const RateProfile& profile = acc_profile();
  bool ok = sched.blocks.size() == 2 && !sched.truncated;
  const auto& b1 = sched.blocks[0];
  const auto& b2 = sched.blocks[1];
  ok = ok && b1.b <= b2.a;                                   // interior-disjoint
  ok = ok && profile.stab(sched.window_starts[1]) <= 0.5 * profile.stab(b1.b);
  ok = ok && sched.membership.pass();
  for (double t : testing::logspace(acc_params().t0, sched.horizon, 48)) {
    ok = ok && sched.glued.tail_upper(t) <= profile.stab(t);
  }

  mode_dynamics::IntegratorConfig icfg;
  std::vector<cex::Band> bands;
  for (int k = 1; k <= 2; ++k) {
    // Budget keeps the acceptance run inside its wall-clock bound; the band
    // is maximal on the shrinking search under this budget.
    bands.push_back(cex::band_search(k, sched, icfg, 1e7, 6e7));
  }
  const cex::GrowthReport rep = cex::verify_growth(sched, bands, icfg, 1e7);
  ok = ok && rep.pi2_over_3_ok;
  for (const auto& row : rep.rows) {
    ok = ok && row.ekbk_ok && row.ekt0_ok && row.cluster_ok;
  }
  // the direct growth inequality, active from the reported threshold on
  ok = ok && rep.k_min_empirical <= 2;
  for (const auto& row : rep.rows) {
    if (row.k >= rep.k_min_empirical) ok = ok && row.direct_status == 1;
  }

  std::ostringstream ss;
  ss << "k_min=" << rep.k_min_empirical << " (analytic " << rep.k_min_analytic << ")";
  for (const auto& row : rep.rows) {
    ss << "; k=" << row.k << " Eu_lo=" << row.Eu_b.lo << " envelope="
       << std::exp(row.envelope_log) << " margin_log=" << row.direct_margin_log;
  }
  detail = ss.str();
  return ok;
}

bool criterion7(std::string& detail) {
  // Lemma suites: the oscillating-integral bound, the exponential-growth
  // constants, and the power/limit-case classifications against the closed
  // envelope forms.
  std::mt19937_64 rng(20240811);
  bool osc_ok = true;
  std::uniform_real_distribution<double> a_d(0.1, 5.0);
  std::uniform_real_distribution<double> len_d(0.5, 15.0);
  std::uniform_real_distribution<double> ell_d(0.3, 40.0);
  for (int i = 0; i < 100; ++i) {
    auto mc = testing::random_monotone(rng, 0.1);
    const double a = a_d(rng);
    const double b = a + len_d(rng);
    auto check = rates::osc_integral_check([g = mc.g](double t) { return g(t); }, a, b,
                                           ell_d(rng), QuadratureOptions{1e-12, 1e-9, 60,
                                                                         100'000'000});
    osc_ok = osc_ok && check.ok;
  }

  bool growth_ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    const double t0 = 0.5;
    auto mc = testing::random_monotone(rng, t0);
    auto [g1, g2] = rates::exp_growth_constants(mc.g, mc.lambda4, t0);
    CumulativeIntegral G([g = mc.g](double t) { return g(t); }, t0);
    for (int i = 0; i < 1000; ++i) {
      const double t = t0 + 1.0 + 9.0 * i / 999.0;
      const double Gt = G.upto(t);
      growth_ok = growth_ok && mc.g(t) <= g1 * Gt * (1.0 + 1e-8) + 1e-12 &&
                  G.upto(t + 1.0) <= g2 * Gt * (1.0 + 1e-8) + 1e-12;
    }
  }

  // Classification against an independent running-max oracle built from the
  // closed G*S forms: coarse scan plus golden-section refinement.
  bool classify_ok = true;
  const double t0 = 1.0;
  for (const auto& [beta, alpha] :
       std::vector<std::pair<double, double>>{{0.5, -0.1}, {0.2, -0.2}, {0.7, -0.3},
                                              {0.5, 0.0}, {0.3, 0.0}, {-0.2, -0.6}}) {
    auto closed_GS = [&, beta = beta, alpha = alpha](double t) {
      const double G = beta == 0.5 ? std::log(t / t0)
                                   : (std::pow(t, 1.0 - 2.0 * beta) - 1.0) / (1.0 - 2.0 * beta);
      return G * std::pow(t, alpha);
    };
    auto oracle_M = [&](double t) {
      // scan in log time, then refine the best bracket to convergence
      const int n = 1024;
      double best = closed_GS(t);
      double best_s = 1.0;
      for (int i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) / n;
        const double v = closed_GS(t0 * std::pow(t / t0, s));
        if (v > best) {
          best = v;
          best_s = s;
        }
      }
      double lo = t0 * std::pow(t / t0, std::max(0.0, best_s - 1.5 / n));
      double hi = t0 * std::pow(t / t0, std::min(1.0, best_s + 1.5 / n));
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 200; ++it) {
        const double x1 = hi - phi * (hi - lo);
        const double x2 = lo + phi * (hi - lo);
        if (closed_GS(x1) < closed_GS(x2)) {
          lo = x1;
        } else {
          hi = x2;
        }
      }
      return std::max(best, closed_GS(0.5 * (lo + hi)));
    };
    const rates::Classification c = rates::classify_power(beta, alpha);
    const RateProfile p = RateProfile::power(beta, alpha, t0);
    for (double t : testing::logspace(2.0, 1e8, 40)) {
      const double want = oracle_M(t);
      classify_ok = classify_ok && std::abs(p.M(t) - want) <= 1e-6 * std::max(want, 1e-12);
    }
    const double far_ratio = oracle_M(1e12) / oracle_M(1e6);
    if (c.kind == rates::Classification::Kind::gec) {
      classify_ok = classify_ok && far_ratio <= 1.0 + 1e-6;
    } else {
      classify_ok = classify_ok && far_ratio > 1.5;
    }
  }

  std::ostringstream ss;
  ss << "oscillating bound " << (osc_ok ? "ok" : "FAIL") << ", growth constants "
     << (growth_ok ? "ok" : "FAIL") << ", classifications " << (classify_ok ? "ok" : "FAIL");
  detail = ss.str();
  return osc_ok && growth_ok && classify_ok;
}

bool criterion8(std::string& detail) {
  // Runaway rate: the classical hyperbolic factor undercuts the growth
  // envelope from a finite time on; the tool reports that time.
  const SmoothFunction gamma(
      [](double t) { return 2.0 * std::sqrt(t) * std::exp(t * t); },
      [](double t) { return (1.0 / std::sqrt(t) + 4.0 * std::pow(t, 1.5)) * std::exp(t * t); });
  const SmoothFunction exact_G([](double t) { return std::exp(2.0 * t * t) - 1.0; });
  const RateProfile profile =
      RateProfile::custom(gamma, rates::Monotonicity::non_decreasing,
                          SmoothFunction::shifted_power(-0.5, 1.0), true, 0.0, exact_G);
  const ClassParams params = ClassParams::make(0.0, 1.0, 4.0);
  const double t_star = bounds::non_optimality_crossover(profile, params, 3.0, 240);
  std::ostringstream ss;
  ss << "classical bound dominates from t* = " << t_star
     << " (envelope not optimal for this profile)";
  detail = ss.str();
  return std::isfinite(t_star) && t_star <= 3.0;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "closed-form residuals", criterion1},
      {2, "integrator against closed forms", criterion2},
      {3, "explicit-example growth rates", criterion3},
      {4, "envelope certification sweeps", criterion4},
      {5, "activation step", criterion5},
      {6, "iterated construction growth", criterion6},
      {7, "lemma suites", criterion7},
      {8, "non-optimality crossover", criterion8},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
      ++i;
    }
  }
  bool all_ok = true;
  for (const auto& crit : criteria()) {
    if (only != 0 && crit.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = crit.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                            .count();
    std::printf("criterion %d (%s): %s [%.1fs] %s\n", crit.id, crit.title,
                ok ? "PASS" : "FAIL", secs, detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
