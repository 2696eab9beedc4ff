#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/oracles.hpp"
#include "wavegec/bounds.hpp"
#include "wavegec/counterexample.hpp"
#include "wavegec/errors.hpp"

using namespace wavegec;
using namespace wavegec::bounds;
using coefficients::Coefficient;
using rates::ClassParams;
using rates::RateProfile;

namespace {

// Fast class for block-based checks: growing rate, quickly decaying
// stabilization, so the activation window stays tiny.
struct QuickBlock {
  ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  RateProfile profile = RateProfile::power(-0.3, -0.5, 1.0);
  counterexample::ActivationBlock block;

  QuickBlock() {
    counterexample::ActivationOptions opts;
    opts.ode_check = false;
    auto [blk, ver] = counterexample::activation_step(10.0, 4.0, 0.0, profile, params, opts);
    REQUIRE(ver.pass());
    block = std::move(blk);
  }
};

const QuickBlock& quick_block() {
  static QuickBlock qb;
  return qb;
}

}  // namespace

TEST_SUITE_BEGIN("bounds");

TEST_CASE("theorem constants") {
  const RateProfile p = RateProfile::power(0.2, -0.2, 1.0);
  const TheoremConstants h14 = theorem_constants(ClassParams::make(1.0, 1.0, 4.0), p);
  CHECK(h14.h1 == doctest::Approx(12.0));
  CHECK(h14.h2 == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-14));
  CHECK(h14.h4 == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  // gamma(1) * S(1) = 1, so the exponential branch of H3 stays small
  CHECK(h14.h3 == doctest::Approx(12.0));

  const TheoremConstants h11 = theorem_constants(ClassParams::make(1.0, 1.0, 1.0), p);
  CHECK(h11.h1 == doctest::Approx(3.0));
  CHECK(h11.h2 == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("estimate factors") {
  const ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  CHECK(kow_factor(3.0, 0.0, params) == 1.0);
  CHECK(kow_factor(1.0, 1.0, params) == doctest::Approx(std::numbers::e));
  CHECK(kow_factor(2.0, 1.0, params) > kow_factor(1.0, 1.0, params));
  CHECK(tar_factor(3.0, 0.0, params) == 1.0);
  CHECK(tar_factor(1.0, 4.0, params) == doctest::Approx(std::exp(5.0)));
  CHECK(tar_factor(2.0, 4.0, params) < tar_factor(1.0, 4.0, params));
  CHECK_THROWS_AS(kow_factor(1.0, -1.0, params), PreconditionError);
}

TEST_CASE("mixed estimate degenerates to its legs") {
  const ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  const RateProfile profile = RateProfile::power(0.2, -0.2, 1.0);
  const Coefficient c = coefficients::make_constant(params.c_inf);
  const double base = 3.0 * params.lambda2 / params.lambda1;
  // constant coefficient: both legs contribute nothing beyond the equivalence factor
  CHECK(mixed_factor(1.0, 1.0, 5.0, 2.0, profile, c, params) == doctest::Approx(base));
  const double pure_tar = mixed_factor(1.0, 5.0, 5.0, 2.0, profile, c, params);
  CHECK(pure_tar == doctest::Approx(base * tar_factor(2.0, profile.G(5.0), params)));
  CHECK_THROWS_AS(mixed_factor(5.0, 1.0, 5.0, 2.0, profile, c, params), PreconditionError);
}

TEST_CASE("switch selection: small frequencies") {
  const ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  const RateProfile profile = RateProfile::power(0.2, -0.2, 1.0);  // gamma(t0) = 1
  const Coefficient c = coefficients::make_constant(params.c_inf);
  const SwitchPlan plan = select_switch(10.0, 0.4, profile, c, params);
  CHECK(plan.branch == SwitchPlan::Branch::small_frequency);
  CHECK(plan.factor == doctest::Approx(1.0));  // no deviation mass at all
}

TEST_CASE("switch selection: constant coefficient collapses the root") {
  const ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  const RateProfile profile = RateProfile::power(0.2, -0.2, 1.0);
  const Coefficient c = coefficients::make_constant(params.c_inf);
  const SwitchPlan plan = select_switch(10.0, 3.0, profile, c, params);
  CHECK(plan.branch == SwitchPlan::Branch::non_increasing_t1);
  CHECK(plan.switch_time == doctest::Approx(params.t0));
  CHECK(plan.kow_exponent == 0.0);
}

TEST_CASE("switch selection balances the two exponents on a block") {
  const QuickBlock& qb = quick_block();
  const double t = qb.block.b;
  const SwitchPlan plan = select_switch(t, 10.0, qb.profile, qb.block.coeff, qb.params);
  // gamma = t^{0.3} is non-decreasing here
  REQUIRE((plan.branch == SwitchPlan::Branch::large_t2 ||
           plan.branch == SwitchPlan::Branch::large_t1));
  if (plan.branch == SwitchPlan::Branch::large_t2) {
    // the balancing property: the two exponents agree at the root
    CHECK(plan.tar_exponent ==
          doctest::Approx(plan.kow_exponent).epsilon(1e-6));
    // bisection residual of the balance equation, relative to G(t)
    const double q = 4.0 * std::pow(qb.params.lambda1, 2.0) / (2.0 * qb.params.lambda1 + 3.0);
    const double resid = qb.profile.G(plan.switch_time) -
                         q * 100.0 * qb.block.coeff.abs_dev_integral(plan.switch_time, t);
    CHECK(std::abs(resid) <= 1e-8 * qb.profile.G(t));
  }
}

TEST_CASE("switchable factor never exceeds the closed-form envelope") {
  const QuickBlock& qb = quick_block();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lam_d(0.05, 60.0);
  std::uniform_real_distribution<double> t_d(qb.params.t0 + 0.5, qb.block.b + 5.0);
  for (int i = 0; i < 100; ++i) {
    const double lambda = lam_d(rng);
    const double t = t_d(rng);
    const SwitchPlan plan = select_switch(t, lambda, qb.profile, qb.block.coeff, qb.params);
    CHECK(std::log(plan.factor) <=
          log_upper_envelope(t, qb.params, qb.profile) + 1e-9);
  }
}

TEST_CASE("factor exponents cross at the balancing frequency") {
  const ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> dG_d(0.1, 50.0);
  std::uniform_real_distribution<double> dev_d(1e-4, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double dG = dG_d(rng);
    const double dev = dev_d(rng);
    const double l1 = params.lambda1;
    const double lam_star = std::sqrt((2.0 * l1 + 3.0) * dG / (4.0 * l1 * l1 * dev));
    const double kow = std::log(kow_factor(lam_star, dev, params));
    const double tar = std::log(tar_factor(lam_star, dG, params));
    CHECK(kow == doctest::Approx(tar).epsilon(1e-12));
  }
}

TEST_CASE("envelopes") {
  const ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  const RateProfile profile = RateProfile::power(0.2, -0.2, 1.0);
  // at t0 the envelope is just the leading constant (H3 here, gamma decreasing)
  CHECK(upper_envelope(1.0, params, profile) == doctest::Approx(12.0));
  CHECK(lower_envelope(1.0, params, profile) == doctest::Approx(1.0 / 12.0));
  CHECK(upper_envelope(50.0, params, profile) * lower_envelope(50.0, params, profile) ==
        doctest::Approx(1.0).epsilon(1e-12));
  double prev = 0.0;
  for (double t : {1.0, 2.0, 10.0, 100.0, 1e4}) {
    const double u = upper_envelope(t, params, profile);
    CHECK(u >= prev);
    prev = u;
  }
}

TEST_CASE("power envelopes track the published exponents") {
  // 2 beta < 1 + alpha: the envelope exponent behaves like t^{(alpha+1)/2 - beta}
  const ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  const RateProfile profile = RateProfile::power(0.2, -0.2, 1.0);
  const double e1 = log_upper_envelope(1e4, params, profile) - std::log(12.0);
  const double e2 = log_upper_envelope(1e6, params, profile) - std::log(12.0);
  const double measured = std::log(e2 / e1) / std::log(1e2);
  CHECK(measured == doctest::Approx(0.2).epsilon(0.02));

  // alpha = 0, beta = 1/2: exponent grows like sqrt(log t)
  const RateProfile log_case = RateProfile::power(0.5, 0.0, 1.0);
  const double l1 = log_upper_envelope(1e4, params, log_case) - std::log(12.0);
  const double l2 = log_upper_envelope(1e8, params, log_case) - std::log(12.0);
  CHECK(l2 / l1 == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("certification of the constant coefficient") {
  const ClassParams params = ClassParams::make(1.0, 1.0, 4.0);
  const RateProfile profile = RateProfile::power(0.2, -0.2, 1.0);
  const Coefficient c = coefficients::make_constant(params.c_inf);
  SweepGrid grid = default_sweep(params, 0.05, 20.0, 6, 50.0, 8);
  const BoundReport report = certify(c, profile, params, grid, {}, 2);
  CHECK(report.all_pass);
  CHECK(report.gate.pass());
  for (const auto& row : report.rows) {
    CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(row.pass);
  }
}

TEST_CASE("certification refuses classes the coefficient does not join") {
  const ClassParams params = ClassParams::make(1.0, 0.8, 1.2, std::nullopt, 1.0);
  const RateProfile profile = RateProfile::power(0.2, -0.5, 1.0);
  const Coefficient c = coefficients::make_no_way();
  SweepGrid grid = default_sweep(params, 0.1, 5.0, 3, 30.0, 5);
  CHECK_THROWS_AS(certify(c, profile, params, grid, {}, 1), MembershipError);
}

TEST_CASE("classical hyperbolic bound overtakes the envelope for runaway rates") {
  // gamma = 2 sqrt(t) exp(t^2), S = (t+1)^{-1/2}, t0 = 0
  const SmoothFunction gamma(
      [](double t) { return 2.0 * std::sqrt(t) * std::exp(t * t); },
      [](double t) {
        return (1.0 / std::sqrt(t) + 4.0 * std::pow(t, 1.5)) * std::exp(t * t);
      });
  const SmoothFunction exact_G([](double t) { return std::exp(2.0 * t * t) - 1.0; });
  const RateProfile profile =
      RateProfile::custom(gamma, rates::Monotonicity::non_decreasing,
                          SmoothFunction::shifted_power(-0.5, 1.0), true, 0.0, exact_G);
  const ClassParams params = ClassParams::make(0.0, 1.0, 4.0);
  const double t_star = non_optimality_crossover(profile, params, 3.0, 200);
  CHECK(std::isfinite(t_star));
  CHECK(t_star <= 3.0);
}

TEST_SUITE_END();
