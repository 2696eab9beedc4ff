#include "wavegec/serialization.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "wavegec/errors.hpp"

namespace wavegec::serialization {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

unsigned long long fnv1a(const std::string& bytes) {
  unsigned long long h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

SmoothFunction table_function(const std::vector<std::pair<double, double>>& knots) {
  // Monotone-in-t piecewise-linear interpolant; enough for classification
  // and envelope work, flagged without higher derivatives.
  if (knots.size() < 2) throw PreconditionError("table form needs at least two knots");
  auto eval = [knots](double t) {
    if (t <= knots.front().first) return knots.front().second;
    if (t >= knots.back().first) return knots.back().second;
    size_t lo = 0, hi = knots.size() - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (knots[mid].first <= t) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double w = (t - knots[lo].first) / (knots[hi].first - knots[lo].first);
    return knots[lo].second * (1.0 - w) + knots[hi].second * w;
  };
  return SmoothFunction(eval);
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw PreconditionError("malformed JSON document");
  return j;
}

}  // namespace

ProfileBundle profile_from_json(const std::string& text) {
  const json j = parse(text);
  for (const char* key : {"t0", "lambda1", "lambda2", "gamma", "stab"}) {
    if (!j.contains(key)) {
      throw PreconditionError(std::string("profile: missing required field '") + key + "'");
    }
  }
  const double t0 = j.at("t0").get<double>();
  const double l1 = j.at("lambda1").get<double>();
  const double l2 = j.at("lambda2").get<double>();
  std::optional<double> l3;
  if (j.contains("lambda3")) l3 = j.at("lambda3").get<double>();
  std::optional<double> c_inf;
  if (j.contains("c_inf")) c_inf = j.at("c_inf").get<double>();
  rates::ClassParams params = rates::ClassParams::make(t0, l1, l2, l3, c_inf);

  const json& jg = j.at("gamma");
  const json& js = j.at("stab");
  const std::string gform = jg.at("form").get<std::string>();
  const std::string sform = js.at("form").get<std::string>();
  if (gform == "power" && sform == "power") {
    const double beta = jg.at("beta").get<double>();
    const double alpha = js.at("alpha").get<double>();
    return {params, rates::RateProfile::power(beta, alpha, t0)};
  }
  auto load_knots = [](const json& spec) {
    std::vector<std::pair<double, double>> knots;
    for (const auto& row : spec.at("knots")) {
      knots.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    }
    return knots;
  };
  SmoothFunction gamma_fn;
  rates::Monotonicity mono = rates::Monotonicity::non_increasing;
  if (gform == "power") {
    const double beta = jg.at("beta").get<double>();
    gamma_fn = SmoothFunction::power(-beta);
    mono = beta >= 0 ? rates::Monotonicity::non_increasing : rates::Monotonicity::non_decreasing;
  } else if (gform == "table") {
    auto knots = load_knots(jg);
    gamma_fn = table_function(knots);
    mono = knots.back().second >= knots.front().second ? rates::Monotonicity::non_decreasing
                                                       : rates::Monotonicity::non_increasing;
  } else {
    throw PreconditionError("profile: gamma form must be 'power' or 'table'");
  }
  SmoothFunction stab_fn;
  bool vanishes = true;
  if (sform == "power") {
    const double alpha = js.at("alpha").get<double>();
    stab_fn = SmoothFunction::power(alpha);
    vanishes = alpha < 0;
  } else if (sform == "table") {
    auto knots = load_knots(js);
    stab_fn = table_function(knots);
    vanishes = knots.back().second <= 0.5 * knots.front().second;
  } else {
    throw PreconditionError("profile: stab form must be 'power' or 'table'");
  }
  return {params, rates::RateProfile::custom(gamma_fn, mono, stab_fn, vanishes, t0)};
}

std::string profile_to_json(const rates::ClassParams& params, const rates::RateProfile& profile) {
  json j;
  j["t0"] = params.t0;
  j["lambda1"] = params.lambda1;
  j["lambda2"] = params.lambda2;
  if (params.lambda3) j["lambda3"] = *params.lambda3;
  j["c_inf"] = params.c_inf;
  if (auto pf = profile.power_form()) {
    j["gamma"] = {{"form", "power"}, {"beta", pf->beta}};
    j["stab"] = {{"form", "power"}, {"alpha", pf->alpha}};
  } else {
    j["gamma"] = {{"form", "custom"}};
    j["stab"] = {{"form", "custom"}};
  }
  return j.dump(2);
}

std::string coefficient_to_json(const coefficients::Coefficient& coeff) {
  json j;
  switch (coeff.kind()) {
    case coefficients::CoeffKind::constant:
      j["kind"] = "constant";
      j["c_inf"] = coeff.c_inf();
      return j.dump(2);
    case coefficients::CoeffKind::no_way:
      j["kind"] = "no_way";
      return j.dump(2);
    case coefficients::CoeffKind::dgcs:
      j["kind"] = "dgcs";
      break;
    case coefficients::CoeffKind::glued:
      j["kind"] = "glued";
      break;
  }
  j["c_inf"] = coeff.c_inf();
  j["domain_start"] = coeff.domain_start();
  json blocks = json::array();
  for (const auto& d : coeff.blocks()) {
    if (!d.serializable) {
      throw VerificationImpossibleError(
          "coefficient_to_json: block has no closed-form description");
    }
    json b;
    b["m"] = d.m;
    b["lambda"] = d.lambda;
    b["a"] = d.a;
    if (std::isfinite(d.b)) b["b"] = d.b;
    b["ramp_width"] = d.ramp_width;
    if (d.eps_is_constant) {
      b["eps"] = {{"kind", "constant"}, {"value", d.eps_value}};
    } else {
      b["eps"] = {{"kind", "modulated"},
                  {"eps0", d.eps0},
                  {"gamma", {{"form", "power"}, {"beta", d.gamma_sq.beta}}}};
    }
    b["phase_n_b"] = d.phase_n_b;
    b["phase_k0_a"] = d.phase_k0_a;
    blocks.push_back(b);
  }
  j["blocks"] = blocks;
  return j.dump(2);
}

coefficients::Coefficient coefficient_from_json(const std::string& text) {
  const json j = parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return coefficients::make_constant(j.at("c_inf").get<double>());
  if (kind == "no_way") return coefficients::make_no_way();
  if (kind != "dgcs" && kind != "glued") {
    throw PreconditionError("coefficient: unknown kind '" + kind + "'");
  }
  const double c_inf = j.at("c_inf").get<double>();
  const double domain_start = j.at("domain_start").get<double>();
  std::vector<std::pair<coefficients::BlockDesc, SmoothFunction>> blocks;
  for (const auto& b : j.at("blocks")) {
    coefficients::BlockDesc d;
    d.m = b.at("m").get<double>();
    d.lambda = b.at("lambda").get<double>();
    d.a = b.at("a").get<double>();
    d.b = b.contains("b") ? b.at("b").get<double>() : std::numeric_limits<double>::infinity();
    d.ramp_width = b.at("ramp_width").get<double>();
    d.phase_n_b = b.value("phase_n_b", 0LL);
    d.phase_k0_a = b.value("phase_k0_a", 0LL);
    d.serializable = true;
    const json& eps = b.at("eps");
    const std::string ek = eps.at("kind").get<std::string>();
    if (ek == "constant") {
      d.eps_is_constant = true;
      d.eps_value = eps.at("value").get<double>();
      if (kind == "dgcs" && !std::isfinite(d.b)) {
        return coefficients::make_dgcs(d.m, d.lambda, d.eps_value, d.a);
      }
      blocks.emplace_back(d, SmoothFunction::constant(d.eps_value));
    } else if (ek == "modulated") {
      d.eps0 = eps.at("eps0").get<double>();
      d.gamma_sq.is_power = true;
      d.gamma_sq.beta = eps.at("gamma").at("beta").get<double>();
      coefficients::CutoffShape theta(d.a, d.b, d.ramp_width);
      SmoothFunction g = SmoothFunction::power(-2.0 * d.gamma_sq.beta);
      coefficients::Modulation mod = coefficients::make_modulation(d.eps0, d.lambda, theta, g);
      blocks.emplace_back(d, mod.as_function());
    } else {
      throw PreconditionError("coefficient: unknown eps kind");
    }
  }
  return coefficients::glue_blocks(c_inf, domain_start, std::move(blocks));
}

std::string trace_to_csv(const mode_dynamics::EnergyTrace& trace) {
  std::string out = "t,u,v,E_kow,E_tar,tarama_valid\n";
  for (const auto& s : trace.samples) {
    out += format_double(s.t) + "," + format_double(s.u) + "," + format_double(s.v) + "," +
           format_double(s.e_kow) + "," + format_double(s.e_tar) + "," +
           (s.tarama_ok ? "1" : "0") + "\n";
  }
  return out;
}

std::string coefficient_trace_csv(const coefficients::Coefficient& coeff,
                                  const std::vector<double>& times) {
  std::string out = "t,c,c_prime,c_second\n";
  for (double t : times) {
    const coefficients::PhasePoint p = coeff.eval_exact(t);
    out += format_double(t) + "," + format_double(p.c) + "," + format_double(p.c1) + "," +
           format_double(p.c2) + "\n";
  }
  return out;
}

std::string bound_report_to_json(const bounds::BoundReport& report) {
  json j;
  j["all_pass"] = report.all_pass;
  j["worst_margin"] = report.worst_margin;
  j["max_saturation"] = report.max_saturation;
  j["note"] = report.note;
  j["gate"] = {{"hyperbolicity", report.gate.hyperbolicity},
               {"derivative_bounds", report.gate.derivative_bounds},
               {"stabilization", report.gate.stabilization},
               {"margin_hyp", report.gate.margin_hyp},
               {"margin_der", report.gate.margin_der},
               {"margin_stab", report.gate.margin_stab}};
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"lambda", r.lambda},
                    {"t", r.t},
                    {"sqrt_M", r.sqrt_M},
                    {"dataset", r.dataset},
                    {"ratio", r.ratio},
                    {"env_upper", r.env_upper},
                    {"env_lower", r.env_lower},
                    {"margin", r.margin},
                    {"pass", r.pass}});
  }
  j["rows"] = rows;
  return j.dump(2);
}

std::string bound_report_to_csv(const bounds::BoundReport& report) {
  std::string out = "lambda,t,ratio,envelope,margin,pass\n";
  for (const auto& r : report.rows) {
    out += format_double(r.lambda) + "," + format_double(r.t) + "," + format_double(r.ratio) +
           "," + format_double(r.env_upper) + "," + format_double(r.margin) + "," +
           (r.pass ? "1" : "0") + "\n";
  }
  return out;
}

std::string schedule_to_json(const counterexample::Schedule& schedule,
                             const std::vector<counterexample::Band>& bands) {
  json j;
  j["t0"] = schedule.params.t0;
  j["lambda1"] = schedule.params.lambda1;
  j["lambda2"] = schedule.params.lambda2;
  j["c_inf"] = schedule.params.c_inf;
  j["H5"] = schedule.H5;
  j["H14"] = schedule.H14;
  j["H15"] = schedule.H15;
  j["H16"] = schedule.H16;
  j["gamma1"] = schedule.gamma1;
  j["gamma2"] = schedule.gamma2;
  j["gamma3"] = schedule.gamma3;
  j["eps0"] = schedule.eps0;
  j["horizon"] = schedule.horizon;
  j["truncated"] = schedule.truncated;
  if (!schedule.note.empty()) j["note"] = schedule.note;
  j["membership"] = {{"hyperbolicity", schedule.membership.hyperbolicity},
                     {"derivative_bounds", schedule.membership.derivative_bounds},
                     {"stabilization", schedule.membership.stabilization},
                     {"margin_hyp", schedule.membership.margin_hyp},
                     {"margin_der", schedule.membership.margin_der},
                     {"margin_stab", schedule.membership.margin_stab}};
  json blocks = json::array();
  for (size_t i = 0; i < schedule.blocks.size(); ++i) {
    const auto& b = schedule.blocks[i];
    const auto& v = schedule.block_checks[i];
    json jb;
    jb["k"] = i + 1;
    jb["A"] = b.A;
    jb["a"] = b.a;
    jb["b"] = b.b;
    jb["lambda"] = b.lambda;
    jb["eps0"] = b.eps0;
    jb["m"] = b.m;
    jb["M_b"] = b.M_b;
    jb["H14"] = b.H14;
    jb["mass_upper"] = b.mass_upper;
    jb["pump_lo"] = b.pump_lo;
    jb["pump_hi"] = b.pump_hi;
    jb["checks"] = {{"m_growth", v.m_growth.pass},
                    {"support", v.support.pass},
                    {"hyperbolicity", v.hyperbolicity.pass},
                    {"derivatives", v.derivatives.pass},
                    {"stabilization", v.stabilization.pass},
                    {"energy", v.energy.pass},
                    {"lambda_sandwich", v.lambda_sandwich.pass},
                    {"lambda_vs_gamma", v.lambda_vs_gamma.pass},
                    {"congruence", v.congruence.pass}};
    jb["margins"] = {{"m_growth", v.m_growth.margin},
                     {"stabilization", v.stabilization.margin},
                     {"energy", v.energy.margin},
                     {"hyperbolicity", v.hyperbolicity.margin},
                     {"derivatives", v.derivatives.margin}};
    if (v.ode_rel_dev) jb["ode_rel_dev"] = *v.ode_rel_dev;
    blocks.push_back(jb);
  }
  j["blocks"] = blocks;
  json jbands = json::array();
  for (const auto& band : bands) {
    json bb;
    bb["k"] = band.k;
    bb["lambda_lo"] = band.lambda_lo;
    bb["lambda_hi"] = band.lambda_hi;
    bb["singleton"] = band.singleton;
    bb["note"] = band.note;
    json samples = json::array();
    for (const auto& s : band.samples) {
      samples.push_back({{"lambda", s[0]}, {"E_b_ratio", s[1]}, {"E_t0_ratio", s[2]}});
    }
    bb["samples"] = samples;
    jbands.push_back(bb);
  }
  j["bands"] = jbands;
  return j.dump(2);
}

std::string growth_report_to_json(const counterexample::GrowthReport& report) {
  json j;
  j["Eu_t0"] = report.Eu_t0;
  j["pi2_over_3_ok"] = report.pi2_over_3_ok;
  j["k_min_empirical"] = report.k_min_empirical;
  j["k_min_analytic"] = report.k_min_analytic;
  j["chain_ok_at_kmin"] = report.chain_ok_at_kmin;
  j["note"] = report.note;
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"k", r.k},
                    {"A_k", r.A_k},
                    {"a_k", r.a_k},
                    {"b_k", r.b_k},
                    {"lambda_k", r.lambda_k},
                    {"M_b", r.M_b},
                    {"E_b_lo", r.E_b.lo},
                    {"E_b_hi", r.E_b.hi},
                    {"E_t0_lo", r.E_t0.lo},
                    {"E_t0_hi", r.E_t0.hi},
                    {"Eu_b_lo", r.Eu_b.lo},
                    {"Eu_b_hi", r.Eu_b.hi},
                    {"ekbk_ok", r.ekbk_ok},
                    {"ekt0_ok", r.ekt0_ok},
                    {"cluster_ok", r.cluster_ok},
                    {"direct_status", r.direct_status},
                    {"direct_margin_log", r.direct_margin_log},
                    {"envelope_log", r.envelope_log}});
  }
  j["rows"] = rows;
  return j.dump(2);
}

std::string growth_report_to_csv(const counterexample::GrowthReport& report) {
  std::string out = "k,A_k,a_k,b_k,lambda_k,M_b,log_energy,envelope,margin\n";
  for (const auto& r : report.rows) {
    const double log_energy = std::log(std::max(r.Eu_b.lo, 1e-300));
    out += std::to_string(r.k) + "," + format_double(r.A_k) + "," + format_double(r.a_k) + "," +
           format_double(r.b_k) + "," + format_double(r.lambda_k) + "," + format_double(r.M_b) +
           "," + format_double(log_energy) + "," + format_double(r.envelope_log) + "," +
           format_double(r.direct_margin_log) + "\n";
  }
  return out;
}

}  // namespace wavegec::serialization
