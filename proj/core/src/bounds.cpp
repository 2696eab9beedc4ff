#include "wavegec/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "wavegec/errors.hpp"
#include "wavegec/quadrature.hpp"

namespace wavegec::bounds {

using coefficients::Coefficient;
using mode_dynamics::IntegratorConfig;
using rates::ClassParams;
using rates::Monotonicity;
using rates::RateProfile;

TheoremConstants theorem_constants(const ClassParams& params, const RateProfile& profile) {
  params.validate();
  const double l1 = params.lambda1;
  const double l2 = params.lambda2;
  TheoremConstants h{};
  h.h1 = 3.0 * l2 / l1;
  h.h2 = std::max(2.0 * std::sqrt(l2 - l1) / (l1 * l1),
                  std::sqrt(2.0 * l1 + 3.0) / std::pow(l1, 1.5));
  h.h3 = std::max(3.0 * l2 / l1,
                  std::exp(profile.gamma(params.t0) * profile.stab(params.t0) / (2.0 * l1 * l1)));
  h.h4 = std::sqrt(2.0 * l1 + 3.0) / std::pow(l1, 1.5);
  return h;
}

double kow_factor(double lambda, double stab_integral, const ClassParams& params) {
  if (!(stab_integral >= 0.0)) throw PreconditionError("kow_factor: stab_integral < 0");
  return std::exp(lambda * stab_integral / std::sqrt(params.lambda1));
}

double tar_factor(double lambda, double delta_G, const ClassParams& params) {
  if (!(delta_G >= 0.0)) throw PreconditionError("tar_factor: delta_G < 0");
  if (!(lambda > 0.0)) throw PreconditionError("tar_factor: lambda <= 0");
  const double l1 = params.lambda1;
  return std::exp((2.0 * l1 + 3.0) * delta_G / (4.0 * std::pow(l1, 2.5) * lambda));
}

namespace {

double tar_exponent(double lambda, double delta_G, const ClassParams& params) {
  const double l1 = params.lambda1;
  return (2.0 * l1 + 3.0) * delta_G / (4.0 * std::pow(l1, 2.5) * lambda);
}

double kow_exponent(double lambda, double stab_integral, const ClassParams& params) {
  return lambda * stab_integral / std::sqrt(params.lambda1);
}

void check_tarama_on(double a, double b, double lambda, const Coefficient& coeff) {
  const int n = 256;
  for (int i = 0; i <= n; ++i) {
    const double t = a + (b - a) * i / n;
    if (!mode_dynamics::tarama_valid(lambda, coeff, t)) {
      throw PreconditionError("mixed_factor: Tarama form not admissible on the first leg");
    }
  }
}

}  // namespace

double mixed_factor(double a, double b_switch, double c_end, double lambda,
                    const RateProfile& profile, const Coefficient& coeff,
                    const ClassParams& params) {
  if (!(params.t0 <= a && a <= b_switch && b_switch <= c_end)) {
    throw PreconditionError("mixed_factor: need t0 <= a <= b_switch <= c_end");
  }
  if (b_switch > a) check_tarama_on(a, b_switch, lambda, coeff);
  const double dG = profile.G(b_switch) - profile.G(a);
  const double dev = coeff.abs_dev_integral(b_switch, c_end);
  return (3.0 * params.lambda2 / params.lambda1) *
         std::exp(tar_exponent(lambda, dG, params) + kow_exponent(lambda, dev, params));
}

SwitchPlan select_switch(double t, double lambda, const RateProfile& profile,
                         const Coefficient& coeff, const ClassParams& params) {
  const double t0 = params.t0;
  const double l1 = params.lambda1;
  const double small_threshold = profile.gamma(t0) / (2.0 * std::pow(l1, 1.5));

  SwitchPlan plan{};
  if (lambda <= small_threshold) {
    plan.branch = SwitchPlan::Branch::small_frequency;
    plan.switch_time = t0;
    plan.tar_exponent = 0.0;
    plan.kow_exponent = kow_exponent(lambda, coeff.abs_dev_integral(t0, t), params);
    plan.factor = std::exp(plan.kow_exponent);
    return plan;
  }

  const double q_const = 4.0 * l1 * l1 / (2.0 * l1 + 3.0);
  // Balance residual G(tau) - q * lambda^2 * tail(tau); increasing in tau,
  // <= 0 at t0 when any deviation mass lies ahead.
  auto balance = [&](double tau) {
    return profile.G(tau) - q_const * lambda * lambda * coeff.abs_dev_integral(tau, t);
  };

  if (profile.gamma_monotonicity() == Monotonicity::non_increasing) {
    plan.branch = SwitchPlan::Branch::non_increasing_t1;
    double root = t0;
    if (balance(t0) < 0.0) {
      root = balance(t) <= 0.0 ? t : bisect(balance, t0, t, 0.0, 200);
    }
    plan.switch_time = root;
    plan.tar_exponent = tar_exponent(lambda, profile.G(root), params);
    plan.kow_exponent = kow_exponent(lambda, coeff.abs_dev_integral(root, t), params);
    plan.factor = (3.0 * params.lambda2 / l1) * std::exp(plan.tar_exponent + plan.kow_exponent);
    return plan;
  }

  // Non-decreasing rate: t1 is the last time where the Tarama form is still
  // cheap for this frequency.
  const double gamma_bound = 2.0 * std::pow(l1, 1.5) * lambda;
  double t1 = t;
  if (profile.gamma(t) > gamma_bound) {
    t1 = bisect([&](double tau) { return gamma_bound - profile.gamma(tau); }, t0, t, 0.0, 200);
  }
  const double tail_t1 = coeff.abs_dev_integral(t1, t);
  if (profile.G(t1) <= q_const * lambda * lambda * tail_t1) {
    plan.branch = SwitchPlan::Branch::large_t1;
    plan.switch_time = t1;
    plan.tar_exponent = tar_exponent(lambda, profile.G(t1), params);
    plan.kow_exponent = kow_exponent(lambda, tail_t1, params);
    // The balance makes the Tarama leg dominated by the Kowaleskian one.
    plan.factor = (3.0 * params.lambda2 / l1) * std::exp(2.0 * plan.kow_exponent);
    return plan;
  }
  plan.branch = SwitchPlan::Branch::large_t2;
  double t2 = t0;
  if (balance(t0) < 0.0) {
    t2 = bisect(balance, t0, t1, 0.0, 200);
  }
  plan.switch_time = t2;
  plan.tar_exponent = tar_exponent(lambda, profile.G(t2), params);
  plan.kow_exponent = kow_exponent(lambda, coeff.abs_dev_integral(t2, t), params);
  plan.factor = (3.0 * params.lambda2 / l1) * std::exp(plan.tar_exponent + plan.kow_exponent);
  return plan;
}

double log_upper_envelope(double t, const ClassParams& params, const RateProfile& profile) {
  const TheoremConstants h = theorem_constants(params, profile);
  const double sqrt_m = std::sqrt(profile.M(t));
  if (profile.gamma_monotonicity() == Monotonicity::non_decreasing) {
    return std::log(h.h1) + h.h2 * sqrt_m;
  }
  return std::log(h.h3) + h.h4 * sqrt_m;
}

double log_lower_envelope(double t, const ClassParams& params, const RateProfile& profile) {
  return -log_upper_envelope(t, params, profile);
}

double upper_envelope(double t, const ClassParams& params, const RateProfile& profile) {
  return std::exp(log_upper_envelope(t, params, profile));
}

double lower_envelope(double t, const ClassParams& params, const RateProfile& profile) {
  return std::exp(log_lower_envelope(t, params, profile));
}

SweepGrid default_sweep(const ClassParams& params, double lambda_lo, double lambda_hi,
                        int lambda_n, double t_hi, int t_n) {
  SweepGrid grid;
  grid.lambdas.reserve(static_cast<size_t>(lambda_n));
  for (int i = 0; i < lambda_n; ++i) {
    const double s = lambda_n == 1 ? 0.0 : static_cast<double>(i) / (lambda_n - 1);
    grid.lambdas.push_back(lambda_lo * std::pow(lambda_hi / lambda_lo, s));
  }
  grid.times.reserve(static_cast<size_t>(t_n));
  for (int i = 1; i <= t_n; ++i) {
    const double s = static_cast<double>(i) / t_n;
    grid.times.push_back(params.t0 * std::pow(t_hi / params.t0, s));
  }
  return grid;
}

BoundReport certify(const Coefficient& coeff, const RateProfile& profile,
                    const ClassParams& params, const SweepGrid& grid, const IntegratorConfig& icfg,
                    int workers) {
  if (grid.lambdas.empty() || grid.times.empty()) {
    throw PreconditionError("certify: empty sweep grid");
  }
  const double horizon = grid.times.back();
  BoundReport report;
  report.gate = coefficients::verify_membership(coeff, profile, params, horizon);
  if (!report.gate.pass()) {
    throw MembershipError("certify: coefficient fails the class-membership gate");
  }
  report.note =
      "finite sweep over two canonical data sets per frequency; a check, not a proof";

  const double c_inf = params.c_inf;
  const size_t n_lambda = grid.lambdas.size();
  const size_t n_time = grid.times.size();
  const size_t n_tasks = 2 * n_lambda;

  // Envelopes depend only on t; precompute once.
  std::vector<double> log_up(n_time), log_lo(n_time), sqrt_m(n_time);
  for (size_t j = 0; j < n_time; ++j) {
    log_up[j] = log_upper_envelope(grid.times[j], params, profile);
    log_lo[j] = -log_up[j];
    sqrt_m[j] = std::sqrt(profile.M(grid.times[j]));
  }

  std::vector<std::vector<double>> ratios(n_tasks, std::vector<double>(n_time, 0.0));
  auto run_task = [&](size_t task) {
    const int dataset = static_cast<int>(task % 2);
    const double lambda = grid.lambdas[task / 2];
    mode_dynamics::ModeState s0;
    s0.t = params.t0;
    s0.lambda = lambda;
    if (dataset == 0) {
      s0.u = 0.0;
      s0.v = std::pow(c_inf, 0.25);
    } else {
      s0.u = std::pow(c_inf, -0.25) / lambda;
      s0.v = 0.0;
    }
    const double e0 = mode_dynamics::kowaleskian_energy(s0, c_inf);
    mode_dynamics::EnergyTrace trace =
        mode_dynamics::integrate_mode(coeff, lambda, s0, horizon, icfg, grid.times);
    // Samples at requested times, skipping the initial record.
    std::vector<double>& out = ratios[task];
    size_t j = 0;
    for (const auto& s : trace.samples) {
      if (j < n_time && s.t == grid.times[j]) {
        out[j] = s.e_kow / e0;
        ++j;
      }
    }
    if (j != n_time) throw NumericError("certify: trace did not hit every grid time");
  };

  int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp<int>(n_workers, 1, static_cast<int>(n_tasks));
  if (n_workers == 1) {
    for (size_t task = 0; task < n_tasks; ++task) run_task(task);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w]() {
        for (size_t task = static_cast<size_t>(w); task < n_tasks;
             task += static_cast<size_t>(n_workers)) {
          run_task(task);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  report.rows.reserve(n_tasks * n_time);
  const double log_one_plus = std::log1p(grid.slack);
  const double log_one_minus = std::log1p(-grid.slack);
  double worst = std::numeric_limits<double>::infinity();
  double saturation = 0.0;
  bool all_pass = true;
  for (size_t li = 0; li < n_lambda; ++li) {
    for (int dataset = 0; dataset < 2; ++dataset) {
      const size_t task = 2 * li + static_cast<size_t>(dataset);
      for (size_t j = 0; j < n_time; ++j) {
        BoundRow row;
        row.lambda = grid.lambdas[li];
        row.t = grid.times[j];
        row.sqrt_M = sqrt_m[j];
        row.dataset = dataset;
        row.ratio = ratios[task][j];
        row.env_upper = std::exp(std::min(log_up[j], 700.0));
        row.env_lower = std::exp(std::max(log_lo[j], -700.0));
        const double log_ratio = std::log(row.ratio);
        const double upper_margin = (log_up[j] + log_one_plus) - log_ratio;
        const double lower_margin = log_ratio - (log_lo[j] + log_one_minus);
        row.margin = std::min(upper_margin, lower_margin);
        row.pass = row.margin >= 0.0;
        all_pass = all_pass && row.pass;
        worst = std::min(worst, row.margin);
        saturation = std::max(saturation, std::exp(log_ratio - log_up[j]));
        report.rows.push_back(row);
      }
    }
  }
  report.worst_margin = worst;
  report.all_pass = all_pass;
  report.max_saturation = saturation;
  return report;
}

double non_optimality_crossover(const RateProfile& profile, const ClassParams& params,
                                double t_hi, int n) {
  const double t0 = params.t0;
  CumulativeIntegral gamma_int([&profile](double t) { return profile.gamma(t); }, t0);
  std::vector<double> ts(static_cast<size_t>(n) + 1);
  std::vector<bool> dominated(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    const double s = static_cast<double>(i) / n;
    ts[i] = t0 + (t_hi - t0) * s;
    const double classical = gamma_int.upto(ts[i]) / params.lambda1;
    dominated[i] = classical <= log_upper_envelope(ts[i], params, profile);
  }
  // Smallest grid time from which dominance holds for the rest of the grid.
  double t_star = std::numeric_limits<double>::infinity();
  for (size_t i = ts.size(); i-- > 0;) {
    if (!dominated[i]) break;
    t_star = ts[i];
  }
  return t_star;
}

}  // namespace wavegec::bounds
