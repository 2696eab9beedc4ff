#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/oracles.hpp"
#include "wavegec/coefficients.hpp"
#include "wavegec/errors.hpp"

using namespace wavegec;
using namespace wavegec::coefficients;

namespace {

// Central differences with the documented step, relative to the sampled
// derivative amplitude so zero crossings of oscillations do not blow up the
// quotient.
void check_fd_consistency(const Coefficient& c, double lo, double hi, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> td(lo, hi);
  std::vector<double> ts(static_cast<size_t>(n));
  double amp1 = 0.0, amp2 = 0.0;
  for (auto& t : ts) {
    t = td(rng);
    amp1 = std::max(amp1, std::abs(c.deriv1(t)));
    amp2 = std::max(amp2, std::abs(c.deriv2(t)));
  }
  for (double t : ts) {
    const double h = 1e-5 * std::max(1.0, std::abs(t));
    const double fd1 = (c.value(t + h) - c.value(t - h)) / (2.0 * h);
    const double an1 = c.deriv1(t);
    CHECK(std::abs(fd1 - an1) <= 1e-4 * std::max(std::abs(an1), 1e-2 * amp1));
    const double fd2 = (c.deriv1(t + h) - c.deriv1(t - h)) / (2.0 * h);
    const double an2 = c.deriv2(t);
    CHECK(std::abs(fd2 - an2) <= 1e-4 * std::max(std::abs(an2), 1e-2 * amp2));
  }
}

}  // namespace

TEST_SUITE_BEGIN("coefficients");

TEST_CASE("cutoff shape ramps and plateau") {
  const CutoffShape theta = make_cutoff(2.0, 9.0);
  CHECK(theta.value(2.0) == 0.0);
  CHECK(theta.value(3.0) == doctest::Approx(1.0));
  CHECK(theta.value(5.5) == 1.0);
  CHECK(theta.value(9.0) == 0.0);
  CHECK(theta.value(1.0) == 0.0);
  CHECK(theta.value(10.0) == 0.0);
  for (int order = 0; order <= 3; ++order) {
    CHECK(theta.max_abs(order) <= 100.0);
  }
  // known smoothstep extrema
  CHECK(theta.max_abs(1) == doctest::Approx(35.0 / 16.0).epsilon(1e-3));
  CHECK(theta.max_abs(3) == doctest::Approx(52.5).epsilon(1e-3));
  CHECK_THROWS_AS(make_cutoff(0.0, 2.9), std::invalid_argument);
}

TEST_CASE("cutoff derivatives are continuous at the joins") {
  const CutoffShape theta = make_cutoff(0.0, 10.0);
  for (double joint : {0.0, 1.0, 9.0, 10.0}) {
    for (int order = 1; order <= 3; ++order) {
      const double left = theta.derivative(joint - 1e-9, order);
      const double right = theta.derivative(joint + 1e-9, order);
      CHECK(std::abs(left - right) <= 1e-5);
    }
  }
}

TEST_CASE("constant coefficient") {
  const Coefficient c = make_constant(1.0);
  CHECK(c.value(17.0) == 1.0);
  CHECK(c.deriv1(17.0) == 0.0);
  CHECK(c.deriv2(17.0) == 0.0);
  CHECK(c.tail_upper(0.0) == 0.0);
  const auto profile = rates::RateProfile::power(0.2, -0.2, 1.0);
  const auto params = rates::ClassParams::make(1.0, 0.5, 1.5);
  const MembershipReport rep = verify_membership(c, profile, params, 100.0, 256);
  CHECK(rep.pass());
  CHECK_THROWS_AS(make_constant(0.0), PreconditionError);
}

TEST_CASE("explicit growing-example coefficient") {
  const Coefficient c = make_no_way();
  CHECK(c.value(1.0) == doctest::Approx(0.8533509461142506).epsilon(1e-6));
  CHECK(c.value(1e6) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(c.kind() == CoeffKind::no_way);
  CHECK(c.tail_kind() == TailKind::divergent);
  check_fd_consistency(c, 1.0, 500.0, 1000, 101);
}

TEST_CASE("growing-example derivatives decay like 1/t") {
  const Coefficient c = make_no_way();
  double c1_max = 0.0, c2_max = 0.0;
  for (double t : testing::logspace(1.0, 1e4, 20000)) {
    c1_max = std::max(c1_max, t * std::abs(c.deriv1(t)));
    c2_max = std::max(c2_max, t * std::abs(c.deriv2(t)));
  }
  CHECK(c1_max < 2.0);
  CHECK(c2_max < 3.0);
  CHECK(c1_max > 0.1);  // the bound is attained at unit scale, not vacuous
}

TEST_CASE("growing-example stabilization integral grows like log") {
  const Coefficient c = make_no_way();
  std::vector<double> logs, vals;
  for (double t : {1e2, 3e2, 1e3, 3e3, 1e4}) {
    logs.push_back(std::log(t));
    vals.push_back(c.abs_dev_integral(1.0, t));
  }
  const double slope = regression_slope(logs, vals);
  const double expected = 1.0 / (2.0 * std::numbers::pi);
  CHECK(std::abs(slope - expected) <= 0.2 * expected);
}

TEST_CASE("growing example fails stabilization in a decaying class") {
  const Coefficient c = make_no_way();
  // Bounds wide enough for the conservative worst-phase scan near the start
  // time; the log-growing deviation integral still violates any vanishing
  // stabilization rate.
  const auto gamma = smooth_scale(SmoothFunction::power(-0.5), 2.5);
  const auto profile = rates::RateProfile::custom(gamma, rates::Monotonicity::non_increasing,
                                                  SmoothFunction::power(-0.5), true, 1.0);
  const auto params = rates::ClassParams::make(1.0, 0.75, 1.35, std::nullopt, 1.0);
  const MembershipReport rep = verify_membership(c, profile, params, 200.0, 512);
  CHECK(rep.hyperbolicity);
  CHECK(rep.derivative_bounds);
  CHECK_FALSE(rep.stabilization);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("resonant family with vanishing modulation is constant") {
  const Coefficient c = make_dgcs(1.3, 7.0, 0.0, 0.0);
  for (double t : {0.0, 1.0, 5.0, 100.0}) {
    CHECK(c.value(t) == doctest::Approx(1.69).epsilon(1e-15));
    CHECK(c.deriv1(t) == 0.0);
  }
}

TEST_CASE("resonant family at the phase origin") {
  const Coefficient c = make_dgcs(1.0, 50.0, 0.1, 0.0);
  CHECK(c.value(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  check_fd_consistency(c, 0.1, 10.0, 1000, 202);
}

TEST_CASE("modulated block has compact support") {
  const CutoffShape theta = make_cutoff(4.0, 12.0);
  const SmoothFunction g = rates::RateProfile::power(0.2, -0.2, 1.0).gamma_squared();
  const Modulation mod = make_modulation(0.25, 9.0, theta, g);
  const Coefficient c = make_dgcs(std::sqrt(2.5), 9.0, mod);
  for (double t : {4.0, 3.0, 12.0, 20.0}) {
    CHECK(c.value(t) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(c.deriv1(t) == 0.0);
  }
  CHECK(std::abs(c.value(8.0) - 2.5) > 1e-6);
  CHECK(c.tail_kind() == TailKind::zero);
  CHECK(c.tail_upper(12.0) == 0.0);
  CHECK(c.tail_upper(13.0) == 0.0);
  check_fd_consistency(c, 4.1, 11.9, 1000, 303);
  CHECK_THROWS_AS(make_modulation(0.0, 9.0, theta, g), PreconditionError);
  CHECK_THROWS_AS(make_modulation(1.5, 9.0, theta, g), PreconditionError);
}

TEST_CASE("deviation integrals: table against direct quadrature") {
  const CutoffShape theta = make_cutoff(4.0, 12.0);
  const SmoothFunction g = rates::RateProfile::power(0.2, -0.2, 1.0).gamma_squared();
  const Modulation mod = make_modulation(0.25, 9.0, theta, g);
  const Coefficient c = make_dgcs(std::sqrt(2.5), 9.0, mod);
  const double direct = integrate(
      [&c](double t) { return std::abs(c.value(t) - 2.5); }, 5.0, 11.0,
      QuadratureOptions{1e-13, 1e-10, 60, 100'000'000});
  CHECK(c.abs_dev_integral(5.0, 11.0) == doctest::Approx(direct).epsilon(1e-8));
  // The smooth envelope bound dominates the true integral.
  CHECK(c.abs_dev_upper(5.0, 11.0) >= direct);
}

TEST_CASE("computation bound ratio is finite, stable, and frequency-uniform") {
  const SmoothFunction g = rates::RateProfile::power(0.2, -0.2, 1.0).gamma_squared();
  const double m = std::sqrt(2.5);

  auto ratio_at = [&](double lambda, int envelope_n) {
    const CutoffShape theta = make_cutoff(10.0, 40.0);
    const Modulation mod = make_modulation(1.0, lambda, theta, g);
    const Coefficient c = make_dgcs(m, lambda, mod);
    const Gamma3Result r = computation_bound_check(c, g, lambda, 1.0, m, envelope_n);
    CHECK(r.pass);
    return r.gamma3_empirical;
  };

  const double r1 = ratio_at(50.0, 512);
  const double r1_fine = ratio_at(50.0, 1024);
  CHECK(r1_fine == doctest::Approx(r1).epsilon(0.02));  // stable under refinement
  const double r2 = ratio_at(100.0, 512);
  CHECK(r2 <= r1 * 1.01);  // doubling the frequency does not grow the bound
}

TEST_CASE("membership needs tail metadata") {
  // A generic modulation comes without decay information; the stabilization
  // check must refuse instead of guessing.
  const Coefficient c = make_dgcs(1.0, 5.0, SmoothFunction::exponential(-1.0), 0.0);
  CHECK(c.tail_kind() == TailKind::unknown);
  CHECK_THROWS_AS(c.tail_upper(1.0), VerificationImpossibleError);
  const auto profile = rates::RateProfile::power(0.2, -0.2, 1.0);
  const auto params = rates::ClassParams::make(1.0, 0.5, 1.5);
  CHECK_THROWS_AS(verify_membership(c, profile, params, 10.0, 64),
                  VerificationImpossibleError);
}

TEST_CASE("vanishing amplitude makes the computation bound trivial") {
  const Coefficient c = make_dgcs(1.0, 10.0, 0.0, 0.0);
  const Gamma3Result r =
      computation_bound_check(c, SmoothFunction::constant(1.0), 10.0, 0.0, 1.0);
  CHECK(r.pass);
  CHECK(r.gamma3_empirical == 0.0);
}

TEST_SUITE_END();
