#include "wavegec/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wavegec/errors.hpp"
#include "wavegec/quadrature.hpp"

namespace wavegec::counterexample {

namespace {
constexpr double kPi = std::numbers::pi;

using coefficients::BlockDesc;
using coefficients::Coefficient;
using coefficients::CutoffShape;
using coefficients::Modulation;
using mode_dynamics::IntegratorConfig;
using mode_dynamics::ModeState;
using rates::ClassParams;
using rates::Monotonicity;
using rates::RateProfile;

double require_midpoint_cinf(const ClassParams& params) {
  const double mid = 0.5 * (params.lambda1 + params.lambda2);
  if (std::abs(params.c_inf - mid) > 1e-12 * mid) {
    throw PreconditionError(
        "counterexample: construction requires c_inf = (Lambda1 + Lambda2)/2");
  }
  return mid;
}

}  // namespace

LemmaConstants lemma_constants(const RateProfile& profile, const ClassParams& params) {
  LemmaConstants lc;
  lc.lambda3 = params.lambda3.value_or(profile.derived_lambda3());
  profile.verify_lambda3(lc.lambda3, params.t0 + 50.0, 512);
  lc.lambda4 = 2.0 * lc.lambda3;
  auto [g1, g2] = rates::exp_growth_constants(profile.gamma_squared(), lc.lambda4, params.t0);
  lc.gamma1 = g1;
  lc.gamma2 = g2;
  lc.lambda5 = 100.0;
  lc.lambda6 = 6.0 * lc.lambda3 * lc.lambda3 + 2.0 * lc.lambda3;
  return lc;
}

double choose_b(double A, double L, double Lambda, const RateProfile& profile,
                const ClassParams& params, const LemmaConstants& lc,
                const ActivationOptions& opts) {
  const double m = std::sqrt(require_midpoint_cinf(params));
  const double t0 = params.t0;
  const double M_A = profile.M(A);
  if (auto pf = profile.power_form()) {
    if (rates::classify_power(pf->beta, pf->alpha).kind == rates::Classification::Kind::gec) {
      throw GecClassError("choose_b: bounded G*S, the class conserves energy");
    }
  }

  // The hitting set {min t : G(t) S(t) >= r} realizes M(b) = G(b) S(b).
  auto hitting_time = [&](double r) {
    double lo = std::max(A, t0);
    double hi = lo;
    double span = std::max(1.0, lo);
    while (profile.GS(hi) < r) {
      lo = hi;
      hi += span;
      span *= 2.0;
      if (hi > opts.horizon_cap) {
        throw ResourceError("choose_b: hitting time beyond the horizon cap (analytic b > " +
                            std::to_string(opts.horizon_cap) + ")");
      }
    }
    if (hi == lo) return hi;
    const double b = bisect([&](double t) { return profile.GS(t) - r; }, lo, hi, 0.0, 200);
    return b;
  };

  const double ratio_floor =
      std::max({16.0 * kPi * kPi / (m * m), 4.0, 4.0 * opts.lambda0 * opts.lambda0,
                4.0 * Lambda * Lambda});
  auto conditions_hold = [&](double b) {
    const double G_b = profile.G(b);
    const double S_b = profile.stab(b);
    return b >= A + 4.0 && profile.M(b) >= L * M_A * (1.0 - 1e-12) &&
           4.0 * lc.gamma1 * S_b <= 1.0 && G_b >= 2.0 * lc.gamma2 * profile.G(A + 2.0) &&
           G_b / S_b >= ratio_floor;
  };

  const double r0 = std::max({L * M_A, M_A, 1e-6});
  double r = r0;
  bool found = false;
  for (int iter = 0; iter < 600; ++iter) {
    if (conditions_hold(hitting_time(r))) {
      found = true;
      break;
    }
    r *= 2.0;
  }
  if (!found) {
    throw GecClassError("choose_b: G*S appears bounded; the class conserves energy");
  }
  // Every condition is monotone along the hitting set, so shrink r back to
  // keep the block as small as the constraints allow (with a sliver of headroom).
  if (r > r0) {
    double lo = 0.5 * r, hi = r;
    for (int iter = 0; iter < 60 && hi - lo > 1e-9 * hi; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (conditions_hold(hitting_time(mid))) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    r = std::min(hi * 1.001, r);
  }
  const double b = hitting_time(r);
  if (!conditions_hold(b)) {
    throw NumericError("choose_b: refinement left the constraint set");
  }
  if (std::abs(profile.M(b) - profile.GS(b)) > 1e-9 * std::max(profile.M(b), 1e-300)) {
    throw NumericError("choose_b: hitting time does not realize the running max");
  }
  return b;
}

std::pair<double, long long> choose_lambda(double b, const RateProfile& profile, double m) {
  const double X = std::sqrt(profile.G(b) / profile.stab(b));
  if (!(X * X >= 16.0 * kPi * kPi / (m * m) * (1.0 - 1e-12))) {
    throw PreconditionError("choose_lambda: G(b)/S(b) below 16 pi^2 / m^2");
  }
  const double raw = X * m * b / (2.0 * kPi);
  if (raw >= 9.0e18) throw ResourceError("choose_lambda: phase index overflows");
  const long long n = static_cast<long long>(std::floor(raw));
  const double lambda = 2.0 * kPi * static_cast<double>(n) / (m * b);
  if (!(0.5 * X <= lambda * (1.0 + 1e-12) && lambda <= X * (1.0 + 1e-12))) {
    throw NumericError("choose_lambda: sandwich failed");
  }
  return {lambda, n};
}

std::pair<double, long long> choose_a(double A, double m, double lambda) {
  const double omega = m * lambda;
  if (!(omega >= 2.0 * kPi * (1.0 - 1e-12))) {
    throw PreconditionError("choose_a: need m * lambda >= 2 pi");
  }
  const double spacing = 2.0 * kPi / omega;
  const long long k0 = static_cast<long long>(std::ceil(A / spacing - 1e-12));
  const double a = spacing * static_cast<double>(k0);
  if (!(a >= A - 1e-9 && a <= A + 1.0 + 1e-9)) {
    throw NumericError("choose_a: grid point escaped [A, A+1]");
  }
  return {a, k0};
}

double choose_eps0(const ClassParams& params, double gamma3, double m) {
  if (!(gamma3 > 0.0)) throw PreconditionError("choose_eps0: need Gamma3 > 0");
  if (!(params.lambda2 > params.lambda1)) {
    throw GecClassError("choose_eps0: Lambda2 must exceed Lambda1");
  }
  return std::min({(params.lambda2 - params.lambda1) / (2.0 * gamma3), 1.0 / (8.0 * gamma3),
                   4.0 * m * m * m * std::numbers::ln2});
}

namespace {

// Integral of f over [a, b] split at the ramp joins, where |eps'| has kinks.
double integrate_block(const std::function<double(double)>& f, double a, double b, double w) {
  const QuadratureOptions opts{1e-14, 1e-10, 50, 100'000'000};
  double total = 0.0;
  const double joins[3] = {a + w, b - w, b};
  double lo = a;
  for (double hi : joins) {
    if (hi > lo) total += integrate(f, lo, hi, opts);
    lo = hi;
  }
  return total;
}

}  // namespace

std::pair<ActivationBlock, BlockVerification> activation_step(double A, double L, double Lambda,
                                                              const RateProfile& profile,
                                                              const ClassParams& params,
                                                              const ActivationOptions& opts,
                                                              const LemmaConstants* shared) {
  params.validate();
  const double c_inf = require_midpoint_cinf(params);
  const double m = std::sqrt(c_inf);
  if (!(A >= params.t0 + 1.0)) {
    throw PreconditionError("activation_step: need A >= t0 + 1");
  }
  if (profile.gamma_max_order() < 3) {
    throw PreconditionError("activation_step: rate function needs three derivatives");
  }
  LemmaConstants lc = shared ? *shared : lemma_constants(profile, params);

  ActivationBlock blk;
  blk.A = A;
  blk.L = L;
  blk.Lambda = Lambda;
  blk.m = m;
  blk.b = choose_b(A, L, Lambda, profile, params, lc, opts);
  auto [lambda, n_b] = choose_lambda(blk.b, profile, m);
  blk.lambda = lambda;
  blk.n_b = n_b;
  auto [a, k0] = choose_a(A, m, lambda);
  blk.a = a;
  blk.k0_a = k0;
  blk.theta = coefficients::make_cutoff(blk.a, blk.b);

  const SmoothFunction g = profile.gamma_squared();
  if (lc.gamma3 <= 0.0) {
    // Probe with the worst admissible amplitude; the ratio is insensitive to
    // eps0 below that.
    Coefficient probe =
        coefficients::make_dgcs(m, lambda, coefficients::make_modulation(1.0, lambda, blk.theta, g));
    auto g3 = coefficients::computation_bound_check(probe, g, lambda, 1.0, m);
    if (!g3.pass) throw NumericError("activation_step: computation bound scan failed");
    lc.gamma3 = 1.1 * g3.gamma3_empirical;
  }
  blk.gamma3 = lc.gamma3;
  blk.eps0 = choose_eps0(params, lc.gamma3, m);

  Modulation mod = coefficients::make_modulation(blk.eps0, lambda, blk.theta, g);
  SmoothFunction eps = mod.as_function();
  BlockDesc desc;
  desc.m = m;
  desc.lambda = lambda;
  desc.a = blk.a;
  desc.b = blk.b;
  desc.ramp_width = blk.theta.ramp_width();
  desc.eps0 = blk.eps0;
  desc.phase_n_b = n_b;
  desc.phase_k0_a = k0;
  if (auto pf = profile.power_form()) {
    desc.gamma_sq.is_power = true;
    desc.gamma_sq.beta = pf->beta;
    desc.serializable = true;
  }
  std::vector<std::pair<BlockDesc, SmoothFunction>> blocks;
  blocks.emplace_back(desc, eps);
  blk.coeff = coefficients::glue_blocks(c_inf, params.t0, std::move(blocks));

  blk.M_b = profile.M(blk.b);
  blk.H14 = blk.eps0 / (16.0 * c_inf * lc.gamma2);

  // Pumping integral bracket: half the eps mass, off by at most the
  // integration-by-parts remainder of the cosine part.
  const double eps_mass = integrate_block([&eps](double t) { return eps(t); }, blk.a, blk.b,
                                          blk.theta.ramp_width());
  const double eps_slope_mass = integrate_block(
      [&eps](double t) { return std::abs(eps.derivative(t, 1)); }, blk.a, blk.b,
      blk.theta.ramp_width());
  const double remainder = eps_slope_mass / (4.0 * m * lambda);
  blk.pump_lo = 0.5 * eps_mass - remainder;
  blk.pump_hi = 0.5 * eps_mass + remainder;
  blk.mass_upper = blk.coeff.abs_dev_upper(blk.a, blk.b);

  // -- verification ---------------------------------------------------------
  BlockVerification ver;
  ver.m_growth.margin = blk.M_b - L * profile.M(A);
  ver.m_growth.pass = ver.m_growth.margin >= -1e-12 * blk.M_b;

  double support_dev = 0.0;
  for (double t : {blk.a - 0.5, blk.a, blk.b, blk.b + 0.5}) {
    if (t >= params.t0) support_dev = std::max(support_dev, std::abs(blk.coeff.value(t) - c_inf));
  }
  ver.support.margin = -support_dev;
  ver.support.pass = support_dev <= 1e-12 * c_inf;

  auto membership =
      coefficients::verify_membership(blk.coeff, profile, params, blk.b + 1.0, 2048);
  ver.hyperbolicity.pass = membership.hyperbolicity;
  ver.hyperbolicity.margin = membership.margin_hyp;
  ver.derivatives.pass = membership.derivative_bounds;
  ver.derivatives.margin = membership.margin_der;

  const double stab_budget = 0.5 * profile.stab(blk.b);
  ver.stabilization.margin = stab_budget - blk.mass_upper;
  ver.stabilization.pass = ver.stabilization.margin >= 0.0;

  const double sqrt_Mb = std::sqrt(blk.M_b);
  const double energy_log_lo = blk.pump_lo / (4.0 * c_inf);
  ver.energy.margin = energy_log_lo - (std::log(0.5) + blk.H14 * sqrt_Mb);
  ver.energy.pass = ver.energy.margin >= 0.0;

  const double X = std::sqrt(profile.G(blk.b) / profile.stab(blk.b));
  ver.lambda_sandwich.margin = std::min(lambda - 0.5 * X, X - lambda);
  ver.lambda_sandwich.pass = ver.lambda_sandwich.margin >= -1e-12 * X;

  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2048; ++i) {
    const double t = A + (blk.b - A) * i / 2048.0;
    const double gam = profile.gamma(t);
    min_gap = std::min(min_gap, lambda * lambda - gam * gam);
  }
  ver.lambda_vs_gamma.margin = min_gap;
  ver.lambda_vs_gamma.pass = min_gap >= 0.0;

  const double omega = m * lambda;
  const double cong_a = std::abs(omega * blk.a / (2.0 * kPi) - static_cast<double>(k0));
  const double cong_b = std::abs(omega * blk.b / (2.0 * kPi) - static_cast<double>(n_b));
  ver.congruence.margin = -(std::max(cong_a / std::max(1.0, static_cast<double>(k0)),
                                     cong_b / std::max(1.0, static_cast<double>(n_b))));
  ver.congruence.pass = ver.congruence.margin >= -1e-9;

  if (opts.ode_check && lambda * (blk.b - blk.a) <= opts.ode_cap &&
      lambda <= opts.icfg.lambda_cap) {
    // Dual oracle: the stepped endpoint against the closed form with the
    // pumping integral resolved by direct quadrature.
    const double I_exact = integrate_block(
        [&eps, omega](double t) {
          const double s = std::sin(omega * t);
          return eps(t) * s * s;
        },
        blk.a, blk.b, blk.theta.ramp_width());
    if (!(I_exact >= blk.pump_lo - 1e-12 && I_exact <= blk.pump_hi + 1e-12)) {
      throw NumericError("activation_step: pumping bracket does not contain the quadrature value");
    }
    ModeState s0{blk.a, 0.0, std::pow(c_inf, 0.25), lambda};
    // Oracle comparisons need the drift far below the 1e-6 gate, so the
    // cross-check runs tighter than production sweeps.
    mode_dynamics::IntegratorConfig tight = opts.icfg;
    tight.rel_tol = std::min(tight.rel_tol, 1e-12);
    tight.abs_tol = std::min(tight.abs_tol, 1e-13);
    const ModeState sb = mode_dynamics::integrate_to(blk.coeff, lambda, s0, blk.b, tight);
    const double E_ode = mode_dynamics::kowaleskian_energy(sb, c_inf);
    const double E_cf = std::exp(I_exact / (4.0 * c_inf));
    const double dev_E = std::abs(E_ode / E_cf - 1.0);
    const double vp_cf = std::pow(c_inf, 0.25) * std::exp(I_exact / (8.0 * c_inf));
    const double dev_v = std::abs(sb.v / vp_cf - 1.0);
    ver.ode_rel_dev = std::max(dev_E, dev_v);
  }

  return {std::move(blk), std::move(ver)};
}

Schedule build_schedule(int K, const RateProfile& profile, const ClassParams& params,
                        const ScheduleOptions& opts) {
  if (K < 1 || K > opts.K_cap) {
    throw PreconditionError("build_schedule: K outside the desk cap");
  }
  const double c_inf = require_midpoint_cinf(params);

  Schedule sched(params, profile);
  LemmaConstants lc = lemma_constants(profile, params);

  ActivationOptions aopts;
  aopts.lambda0 = opts.lambda0;
  aopts.ode_cap = opts.ode_cap;
  aopts.ode_check = opts.ode_check;
  aopts.icfg = opts.icfg;

  double A = params.t0 + 1.0;
  for (int k = 1; k <= K; ++k) {
    const double L = 4.0 * static_cast<double>(k) * static_cast<double>(k);
    const double Lambda = k == 1 ? opts.lambda0 : sched.blocks.back().lambda + 1.0;
    try {
      auto [blk, ver] = activation_step(A, L, Lambda, profile, params, aopts, &lc);
      if (lc.gamma3 <= 0.0) lc.gamma3 = blk.gamma3;
      sched.window_starts.push_back(A);
      sched.blocks.push_back(std::move(blk));
      sched.block_checks.push_back(ver);
    } catch (const ResourceError& e) {
      sched.truncated = true;
      sched.note = std::string("truncated at k=") + std::to_string(k) + ": " + e.what();
      break;
    }
    if (k == K) break;
    // Next window: geometric search from b_k until the stabilization rate halves.
    const double b_k = sched.blocks.back().b;
    const double target = 0.5 * profile.stab(b_k);
    double next_A = b_k;
    int guard = 0;
    while (profile.stab(next_A) > target) {
      next_A *= opts.a_search_ratio;
      if (++guard > 4000 || next_A > 1e306) {
        throw NumericError("build_schedule: stabilization rate does not halve");
      }
    }
    A = next_A;
  }
  if (sched.blocks.empty()) {
    throw GecClassError("build_schedule: no block could be constructed");
  }

  // Glue all block segments over a common constant background.
  std::vector<std::pair<BlockDesc, SmoothFunction>> segs;
  const SmoothFunction g = profile.gamma_squared();
  for (const auto& blk : sched.blocks) {
    Modulation mod = coefficients::make_modulation(blk.eps0, blk.lambda, blk.theta, g);
    BlockDesc d = blk.coeff.blocks().front();
    segs.emplace_back(d, mod.as_function());
  }
  sched.glued = coefficients::glue_blocks(c_inf, params.t0, std::move(segs));

  sched.gamma1 = lc.gamma1;
  sched.gamma2 = lc.gamma2;
  sched.gamma3 = sched.blocks.front().gamma3;
  sched.eps0 = sched.blocks.front().eps0;
  sched.H14 = sched.blocks.front().H14;
  sched.H5 = 0.5 * sched.H14;
  const bounds::TheoremConstants tc = bounds::theorem_constants(params, profile);
  if (profile.gamma_monotonicity() == Monotonicity::non_decreasing) {
    sched.H15 = tc.h1;
    sched.H16 = tc.h2;
  } else {
    sched.H15 = tc.h3;
    sched.H16 = tc.h4;
  }

  sched.horizon = opts.horizon > 0.0 ? opts.horizon : sched.blocks.back().b * 1.05;
  sched.membership =
      coefficients::verify_membership(sched.glued, profile, params, sched.horizon, 2048);
  return sched;
}

// ---------------------------------------------------------------------------
// Propagation along the glued coefficient

namespace {

struct Cursor {
  bool exact = true;
  ModeState s{};
  double fuzz = 1e-15;  // relative energy bar while exact
  EnergyInterval e{1.0, 1.0};
};

void sync_energy(Cursor& cur, double c_inf) {
  const double E = mode_dynamics::kowaleskian_energy(cur.s, c_inf);
  cur.e = {E * (1.0 - cur.fuzz), E * (1.0 + cur.fuzz)};
}

// Exact rotation across a constant-speed span.
void rotate(Cursor& cur, double c_inf, double lambda, double t_to) {
  if (!cur.exact) return;  // energy intervals are rotation-invariant
  const double omega = lambda * std::sqrt(c_inf);
  const double dt = t_to - cur.s.t;
  const double co = std::cos(omega * dt);
  const double si = std::sin(omega * dt);
  const double u = cur.s.u * co + cur.s.v / omega * si;
  const double v = -cur.s.u * omega * si + cur.s.v * co;
  cur.s.u = u;
  cur.s.v = v;
  cur.s.t = t_to;
  cur.fuzz += 4e-16;
  sync_energy(cur, c_inf);
}

void widen_by_block(Cursor& cur, const ActivationBlock& blk, double lambda, double lambda1,
                    double t_to) {
  const double delta = blk.mass_upper;
  const double f = lambda * delta / std::sqrt(lambda1);
  cur.e = {cur.e.lo * std::exp(-f), cur.e.hi * std::exp(f)};
  cur.exact = false;
  cur.s.t = t_to;
}

}  // namespace

std::vector<EnergyInterval> mode_energies(const Schedule& schedule, int anchor_k, double lambda,
                                          const std::vector<double>& times,
                                          const IntegratorConfig& icfg, double ode_cap) {
  const double c_inf = schedule.params.c_inf;
  const double t0 = schedule.params.t0;
  const int K = static_cast<int>(schedule.blocks.size());
  if (anchor_k < 1 || anchor_k > K) throw PreconditionError("mode_energies: bad anchor index");
  const ActivationBlock& anchor = schedule.blocks[static_cast<size_t>(anchor_k - 1)];

  std::vector<EnergyInterval> out(times.size());

  auto block_feasible = [&](const ActivationBlock& blk) {
    return lambda * (blk.b - blk.a) <= ode_cap && lambda <= icfg.lambda_cap;
  };

  auto cross_block = [&](Cursor& cur, const ActivationBlock& blk, bool forward) {
    const double from = forward ? blk.a : blk.b;
    const double to = forward ? blk.b : blk.a;
    // The closed form is the primary route across the block's own frequency
    // when entering at the aligned left endpoint with no displacement;
    // stepping stays as the cross-check inside activation_step.
    const double omega_scale = lambda * std::sqrt(c_inf);
    if (cur.exact && forward && lambda == blk.lambda &&
        std::abs(cur.s.u) * omega_scale <= 1e-9 * std::abs(cur.s.v)) {
      const double f_lo = std::exp(blk.pump_lo / (4.0 * c_inf));
      const double f_hi = std::exp(blk.pump_hi / (4.0 * c_inf));
      const double E = mode_dynamics::kowaleskian_energy(cur.s, c_inf);
      cur.e = {E * (1.0 - cur.fuzz) * f_lo, E * (1.0 + cur.fuzz) * f_hi};
      cur.exact = false;
      cur.s.t = to;
      return;
    }
    if (cur.exact && block_feasible(blk)) {
      const ModeState in = cur.s;
      const ModeState mid = mode_dynamics::integrate_to(schedule.glued, lambda, in, to, icfg);
      const ModeState back = mode_dynamics::integrate_to(schedule.glued, lambda, mid, from, icfg);
      const double E_in = mode_dynamics::kowaleskian_energy(in, c_inf);
      const double E_back = mode_dynamics::kowaleskian_energy(back, c_inf);
      const double scale = std::sqrt(back.u * back.u + in.u * in.u + 1e-300) +
                           std::sqrt(back.v * back.v + in.v * in.v + 1e-300);
      const double dev_state =
          (std::abs(back.u - in.u) + std::abs(back.v - in.v)) / scale;
      const double dev = std::max(std::abs(E_back / E_in - 1.0), dev_state);
      cur.s = mid;
      cur.fuzz += 2.0 * dev + 1e-13;
      sync_energy(cur, c_inf);
      return;
    }
    widen_by_block(cur, blk, lambda, schedule.params.lambda1, to);
  };

  // Record helper: all requested times matching t pick up the cursor energy.
  auto record_at = [&](double t, const Cursor& cur) {
    for (size_t i = 0; i < times.size(); ++i) {
      if (times[i] == t) out[i] = cur.e;
    }
  };
  // Times inside a constant span share the span's conserved energy.
  auto record_span = [&](double lo, double hi, const Cursor& cur) {
    for (size_t i = 0; i < times.size(); ++i) {
      if (times[i] > lo && times[i] < hi) out[i] = cur.e;
    }
  };

  for (double t : times) {
    if (t < t0) throw PreconditionError("mode_energies: time below t0");
    for (const auto& blk : schedule.blocks) {
      if (t > blk.a && t < blk.b) {
        throw PreconditionError("mode_energies: times inside block interiors are unsupported");
      }
    }
  }

  const double t_max = times.empty() ? anchor.a : *std::max_element(times.begin(), times.end());

  // Backward sweep: a_k -> t0, alternating constant spans and lower blocks.
  {
    Cursor cur;
    cur.s = ModeState{anchor.a, 0.0, std::pow(c_inf, 0.25), lambda};
    sync_energy(cur, c_inf);
    record_at(anchor.a, cur);
    double right_edge = anchor.a;
    for (int j = anchor_k - 1;; --j) {
      const double left_edge = j >= 1 ? schedule.blocks[static_cast<size_t>(j - 1)].b : t0;
      record_span(left_edge, right_edge, cur);
      if (cur.exact) {
        rotate(cur, c_inf, lambda, left_edge);
      } else {
        cur.s.t = left_edge;
      }
      record_at(left_edge, cur);
      if (j == 0) break;
      const ActivationBlock& blk = schedule.blocks[static_cast<size_t>(j - 1)];
      cross_block(cur, blk, false);
      record_at(blk.a, cur);
      right_edge = blk.a;
    }
  }

  // Forward sweep: a_k -> t_max.
  if (t_max > anchor.a) {
    Cursor cur;
    cur.s = ModeState{anchor.a, 0.0, std::pow(c_inf, 0.25), lambda};
    sync_energy(cur, c_inf);
    for (int j = anchor_k; j <= K; ++j) {
      const ActivationBlock& blk = schedule.blocks[static_cast<size_t>(j - 1)];
      cross_block(cur, blk, true);
      record_at(blk.b, cur);
      const double next_a = j < K ? schedule.blocks[static_cast<size_t>(j)].a
                                  : std::numeric_limits<double>::infinity();
      record_span(blk.b, next_a, cur);
      if (j == K || next_a > t_max) break;
      if (cur.exact) {
        rotate(cur, c_inf, lambda, next_a);
      } else {
        cur.s.t = next_a;
      }
      record_at(next_a, cur);
    }
  }

  return out;
}

Band band_search(int k, const Schedule& schedule, const IntegratorConfig& icfg, double ode_cap,
                 double budget_steps) {
  const int K = static_cast<int>(schedule.blocks.size());
  if (k < 1 || k > K) throw PreconditionError("band_search: bad block index");
  const ActivationBlock& blk = schedule.blocks[static_cast<size_t>(k - 1)];
  Band band;
  band.k = k;
  band.lambda_lo = blk.lambda;
  band.lambda_hi = blk.lambda;
  band.singleton = true;

  const double lambda_next =
      k < K ? schedule.blocks[static_cast<size_t>(k)].lambda : blk.lambda + 1.0;

  // Cost model: steps scale with lambda * (total block span crossed); each
  // sample pays for the block end and, via reversal checks, a factor 4.
  const double sup_c = std::sqrt(schedule.glued.upper_bound());
  double span_crossed = blk.b - blk.a;
  for (int j = 1; j < k; ++j) {
    span_crossed += schedule.blocks[static_cast<size_t>(j - 1)].b -
                    schedule.blocks[static_cast<size_t>(j - 1)].a;
  }
  auto sample_cost = [&](double lam) {
    return 4.0 * span_crossed * lam * sup_c * icfg.steps_per_period / (2.0 * kPi);
  };
  auto sample_feasible = [&](double lam) {
    if (lam > icfg.lambda_cap) return false;
    for (int j = 1; j <= k; ++j) {
      const ActivationBlock& bj = schedule.blocks[static_cast<size_t>(j - 1)];
      if (lam * (bj.b - bj.a) > ode_cap) return false;
    }
    return true;
  };
  if (!sample_feasible(blk.lambda) || sample_cost(blk.lambda) * 5.0 > budget_steps) {
    band.note = "sampling infeasible at desk scale; singleton cluster at the block frequency";
    return band;
  }

  const auto [E_k_t0, E_k_b] = [&] {
    auto es = mode_energies(schedule, k, blk.lambda, {schedule.params.t0, blk.b}, icfg, ode_cap);
    return std::make_pair(es[0], es[1]);
  }();

  double spent = sample_cost(blk.lambda);
  double width = (lambda_next - blk.lambda) * 0.999;
  while (width > 1e-6 * blk.lambda) {
    double candidate_cost = 0.0;
    bool feasible = true;
    for (int i = 1; i <= 5; ++i) {
      const double lam = blk.lambda + width * i / 6.0;
      feasible = feasible && sample_feasible(lam);
      candidate_cost += sample_cost(lam);
    }
    if (!feasible || spent + candidate_cost > budget_steps) {
      width *= 0.5;
      if (spent > budget_steps) {
        band.note = "budget exhausted during shrink; singleton cluster";
        return band;
      }
      continue;
    }
    bool all_ok = true;
    std::vector<std::array<double, 3>> samples;
    for (int i = 1; i <= 5 && all_ok; ++i) {
      const double lam = blk.lambda + width * i / 6.0;
      auto es = mode_energies(schedule, k, lam, {schedule.params.t0, blk.b}, icfg, ode_cap);
      spent += sample_cost(lam);
      const EnergyInterval e_t0 = es[0];
      const EnergyInterval e_b = es[1];
      const bool cond_b = e_b.lo >= 0.5 * E_k_b.hi;
      const bool cond_t0 = e_t0.hi <= 2.0 * E_k_t0.lo;
      samples.push_back({lam, e_b.lo / std::max(E_k_b.hi, 1e-300),
                         e_t0.hi / std::max(E_k_t0.lo, 1e-300)});
      all_ok = cond_b && cond_t0;
    }
    if (all_ok) {
      band.lambda_hi = blk.lambda + width;
      band.singleton = false;
      band.samples = std::move(samples);
      band.note = "five interior samples verified";
      return band;
    }
    width *= 0.5;
  }
  band.note = "band collapsed below 1e-6 * lambda_k; singleton cluster";
  return band;
}

EnergyInterval superposition_energy(const Schedule& schedule, const std::vector<Band>& bands,
                                    double t, const IntegratorConfig& icfg, double ode_cap) {
  const int K = static_cast<int>(schedule.blocks.size());
  EnergyInterval total{0.0, 0.0};
  for (int k = 1; k <= K; ++k) {
    (void)bands;  // clusters use the singleton quadrature at lambda_k
    if (t == schedule.params.t0) {
      const double term = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
      total.lo += term;
      total.hi += term;
      continue;
    }
    const double lam = schedule.blocks[static_cast<size_t>(k - 1)].lambda;
    auto es = mode_energies(schedule, k, lam, {schedule.params.t0, t}, icfg, ode_cap);
    const EnergyInterval e_t0 = es[0];
    const EnergyInterval e_t = es[1];
    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    total.lo += e_t.lo / (k2 * e_t0.hi);
    total.hi += e_t.hi / (k2 * std::max(e_t0.lo, 1e-300));
  }
  return total;
}

GrowthReport verify_growth(const Schedule& schedule, const std::vector<Band>& bands,
                           const IntegratorConfig& icfg, double ode_cap) {
  const int K = static_cast<int>(schedule.blocks.size());
  GrowthReport rep;
  rep.note =
      "clusters use the singleton quadrature at lambda_k (band measures reported separately); "
      "energies are certified intervals";
  (void)bands;

  // One traversal per cluster, recording t0 and every block end.
  std::vector<double> record_times{schedule.params.t0};
  for (const auto& blk : schedule.blocks) record_times.push_back(blk.b);
  std::vector<std::vector<EnergyInterval>> table;
  table.reserve(static_cast<size_t>(K));
  for (int k = 1; k <= K; ++k) {
    table.push_back(mode_energies(schedule, k, schedule.blocks[static_cast<size_t>(k - 1)].lambda,
                                  record_times, icfg, ode_cap));
  }

  double eu_t0 = 0.0;
  for (int k = 1; k <= K; ++k) eu_t0 += 1.0 / (static_cast<double>(k) * static_cast<double>(k));
  rep.Eu_t0 = eu_t0;
  rep.pi2_over_3_ok = eu_t0 <= kPi * kPi / 3.0 + 1e-12;

  for (int k = 1; k <= K; ++k) {
    const ActivationBlock& blk = schedule.blocks[static_cast<size_t>(k - 1)];
    GrowthRow row;
    row.k = k;
    row.A_k = schedule.window_starts[static_cast<size_t>(k - 1)];
    row.a_k = blk.a;
    row.b_k = blk.b;
    row.lambda_k = blk.lambda;
    row.M_b = blk.M_b;
    row.E_t0 = table[static_cast<size_t>(k - 1)][0];
    row.E_b = table[static_cast<size_t>(k - 1)][static_cast<size_t>(k)];

    const double sqrt_Mb = std::sqrt(blk.M_b);
    row.ekbk_ok = row.E_b.lo >= 0.5 * std::exp(schedule.H14 * sqrt_Mb) * (1.0 - 1e-12);
    const double ekt0_budget =
        schedule.H15 * std::exp(schedule.H16 * std::sqrt(schedule.profile.M(row.A_k)));
    row.ekt0_ok = row.E_t0.hi <= ekt0_budget * (1.0 + 1e-12);

    EnergyInterval eu{0.0, 0.0};
    for (int j = 1; j <= K; ++j) {
      const EnergyInterval e_t = table[static_cast<size_t>(j - 1)][static_cast<size_t>(k)];
      const EnergyInterval e_t0 = table[static_cast<size_t>(j - 1)][0];
      const double j2 = static_cast<double>(j) * static_cast<double>(j);
      eu.lo += e_t.lo / (j2 * e_t0.hi);
      eu.hi += e_t.hi / (j2 * std::max(e_t0.lo, 1e-300));
    }
    row.Eu_b = eu;

    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    row.cluster_ok = eu.lo >= row.E_b.lo / (2.0 * k2 * row.E_t0.hi) * (1.0 - 1e-9);

    row.envelope_log = std::log(eu_t0) + schedule.H5 * sqrt_Mb;
    const double lhs_lo = std::log(std::max(eu.lo, 1e-300));
    const double lhs_hi = std::log(std::max(eu.hi, 1e-300));
    if (lhs_lo >= row.envelope_log) {
      row.direct_status = 1;
    } else if (lhs_hi < row.envelope_log) {
      row.direct_status = -1;
    } else {
      row.direct_status = 0;
    }
    row.direct_margin_log = lhs_lo - row.envelope_log;
    rep.rows.push_back(row);
  }

  rep.k_min_empirical = K + 1;
  for (int k = K; k >= 1; --k) {
    if (rep.rows[static_cast<size_t>(k - 1)].direct_status == 1) {
      rep.k_min_empirical = k;
    } else {
      break;
    }
  }

  // Arithmetic chain: (H14/2) sqrt(M(b_k)) >= H16 sqrt(M(A_k)) + 2 log k +
  // log(4 pi^2 H15 / 3), granted M(b_k) >= 4 k^2 M(A_k) and M(A_k) >= 1.
  const double c_log = std::log(4.0 * kPi * kPi * schedule.H15 / 3.0);
  long long k_min = -1;
  for (long long k = 1; k <= 2'000'000'000LL; k = k < 1000 ? k + 1 : k + std::max<long long>(1, k / 1000)) {
    const double kk = static_cast<double>(k);
    const bool c1 = schedule.H14 * kk >= 2.0 * schedule.H16;
    const bool c2 = 0.5 * schedule.H14 * kk >= 2.0 * std::log(kk) + std::max(0.0, c_log);
    if (c1 && c2) {
      k_min = k;
      break;
    }
  }
  rep.k_min_analytic = k_min;
  if (k_min > 0) {
    const double kk = static_cast<double>(k_min);
    rep.chain_ok_at_kmin = schedule.H14 * kk >= 2.0 * schedule.H16 &&
                           0.5 * schedule.H14 * kk >= 2.0 * std::log(kk) + std::max(0.0, c_log);
  }
  return rep;
}

}  // namespace wavegec::counterexample
