#include "harness/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavegec/bounds.hpp"
#include "wavegec/counterexample.hpp"
#include "wavegec/errors.hpp"
#include "wavegec/serialization.hpp"
#include "wavegec/version.hpp"

namespace wavegec::harness {

namespace fs = std::filesystem;
using nlohmann::json;
namespace ser = wavegec::serialization;

namespace {

constexpr const char* kSchemaPointer = "docs/config-schema.json";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read file: " + path + " (see " + kSchemaPointer + ")");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  json config;
  std::string config_bytes;
  fs::path out;
  std::map<std::string, std::string> artifacts;  // relative path -> bytes
  std::map<std::string, double> worst_margins;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void add(const std::string& name, const std::string& bytes) { artifacts[name] = bytes; }

  void finish() {
    fs::create_directories(out);
    json manifest;
    manifest["tool"] = std::string(kToolName) + " " + kVersion;
    manifest["config_fnv1a"] = ser::fnv1a(config_bytes);
    json arts = json::array();
    for (const auto& [name, bytes] : artifacts) {
      std::ofstream f(out / name, std::ios::binary);
      f << bytes;
      arts.push_back({{"path", name}, {"bytes", bytes.size()}, {"fnv1a", ser::fnv1a(bytes)}});
    }
    manifest["artifacts"] = arts;
    json margins = json::object();
    for (const auto& [k, v] : worst_margins) margins[k] = v;
    manifest["worst_margins"] = margins;
    std::ofstream mf(out / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    std::cerr << "wall-clock: " << elapsed << " ms, artifacts: " << artifacts.size() << "\n";
  }
};

Run open_run(const CliOptions& opts, const std::vector<std::string>& required) {
  Run run;
  run.config_bytes = read_file(opts.config_path);
  json j = json::parse(run.config_bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw PreconditionError("config is not a JSON object (see " + std::string(kSchemaPointer) + ")");
  }
  static const std::vector<std::string> known = {
      "profile", "integrator", "horizon", "workers", "sweep",
      "coefficients", "simulate", "counterexample", "classify", "output"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw PreconditionError("config: unknown key '" + it.key() + "' (see " + kSchemaPointer +
                              ")");
    }
  }
  for (const auto& key : required) {
    if (!j.contains(key)) {
      throw PreconditionError("config: missing required key '" + key + "' (see " +
                              kSchemaPointer + ")");
    }
  }
  run.config = std::move(j);
  run.out = opts.out_dir;
  return run;
}

ser::ProfileBundle load_profile(const json& config) {
  return ser::profile_from_json(config.at("profile").dump());
}

mode_dynamics::IntegratorConfig load_integrator(const json& config) {
  mode_dynamics::IntegratorConfig icfg;
  if (config.contains("integrator")) {
    const json& ji = config.at("integrator");
    icfg.steps_per_period = ji.value("steps_per_period", icfg.steps_per_period);
    icfg.abs_tol = ji.value("abs_tol", icfg.abs_tol);
    icfg.rel_tol = ji.value("rel_tol", icfg.rel_tol);
    icfg.lambda_cap = ji.value("lambda_cap", icfg.lambda_cap);
    icfg.max_steps = ji.value("max_steps", icfg.max_steps);
  }
  icfg.validate();
  return icfg;
}

double load_horizon(const json& config, const CliOptions& opts, double fallback) {
  if (opts.horizon > 0.0) return opts.horizon;
  return config.value("horizon", fallback);
}

struct NamedCoefficient {
  std::string name;
  coefficients::Coefficient coeff;
};

std::vector<NamedCoefficient> load_coefficients(const json& config,
                                                const ser::ProfileBundle& bundle,
                                                const mode_dynamics::IntegratorConfig& icfg) {
  std::vector<NamedCoefficient> out;
  if (!config.contains("coefficients")) return out;
  int index = 0;
  for (const auto& spec : config.at("coefficients")) {
    const std::string kind = spec.at("kind").get<std::string>();
    std::string name = spec.value("name", kind + "_" + std::to_string(index));
    if (kind == "constant") {
      out.push_back({name, coefficients::make_constant(
                               spec.value("c_inf", bundle.params.c_inf))});
    } else if (kind == "no_way") {
      out.push_back({name, coefficients::make_no_way()});
    } else if (kind == "dgcs") {
      const double m = spec.at("m").get<double>();
      const double lambda = spec.at("lambda").get<double>();
      const json& eps = spec.at("eps");
      if (eps.at("kind").get<std::string>() == "constant") {
        out.push_back({name, coefficients::make_dgcs(m, lambda, eps.at("value").get<double>(),
                                                     spec.value("domain_start", 0.0))});
      } else {
        throw PreconditionError("coefficients: inline dgcs supports constant eps only");
      }
    } else if (kind == "block") {
      counterexample::ActivationOptions aopts;
      aopts.lambda0 = spec.value("lambda0", 0.0);
      aopts.ode_check = spec.value("ode_check", true);
      aopts.icfg = icfg;
      auto [blk, ver] = counterexample::activation_step(
          spec.at("A").get<double>(), spec.at("L").get<double>(), spec.value("Lambda", 0.0),
          bundle.profile, bundle.params, aopts);
      (void)ver;
      out.push_back({name, blk.coeff});
    } else if (kind == "schedule") {
      counterexample::ScheduleOptions sopts;
      sopts.lambda0 = spec.value("lambda0", 0.0);
      sopts.ode_check = spec.value("ode_check", true);
      sopts.icfg = icfg;
      counterexample::Schedule sched =
          counterexample::build_schedule(spec.value("K", 2), bundle.profile, bundle.params, sopts);
      out.push_back({name, sched.glued});
    } else {
      throw PreconditionError("coefficients: unknown kind '" + kind + "'");
    }
    ++index;
  }
  return out;
}

std::vector<double> geometric_times(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  const double base = lo > 0.0 ? lo : 1e-3;
  for (int i = 1; i <= n; ++i) {
    out.push_back(base * std::pow(hi / base, static_cast<double>(i) / n));
  }
  return out;
}

int guarded(const char* what, const std::function<int()>& body) {
  try {
    return body();
  } catch (const PreconditionError& e) {
    std::cerr << what << ": usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << what << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int run_classify(const CliOptions& opts) {
  return guarded("classify", [&] {
    Run run = open_run(opts, {"profile"});
    const ser::ProfileBundle bundle = load_profile(run.config);
    json result;
    std::string line;
    if (auto pf = bundle.profile.power_form()) {
      const rates::Classification c = rates::classify_power(pf->beta, pf->alpha);
      switch (c.kind) {
        case rates::Classification::Kind::gec:
          line = "GEC";
          result["classification"] = "GEC";
          break;
        case rates::Classification::Kind::growth:
          line = "growth exponent " + ser::format_double(c.exponent);
          result["classification"] = "growth";
          result["exponent"] = c.exponent;
          break;
        case rates::Classification::Kind::log_corrected:
          line = "GEC fails, M ~ log t";
          result["classification"] = "log_corrected";
          break;
      }
    } else {
      const double horizon = load_horizon(run.config, opts, 1e4);
      double sup = 0.0;
      double at = bundle.params.t0;
      for (double t : geometric_times(std::max(bundle.params.t0, 1e-3), horizon, 400)) {
        const double gs = bundle.profile.GS(t);
        if (gs > sup) {
          sup = gs;
          at = t;
        }
      }
      const bool growing = at > 0.9 * horizon;
      result["sup_GS"] = sup;
      result["sup_at"] = at;
      result["trend"] = growing ? "increasing at horizon" : "peaked inside horizon";
      line = "custom profile: sup G*S = " + ser::format_double(sup) +
             (growing ? " (still increasing at horizon)" : " (peaked inside horizon)");
    }
    if (run.config.contains("classify") && run.config.at("classify").contains("non_optimality")) {
      const json& no = run.config.at("classify").at("non_optimality");
      const double t_star = bounds::non_optimality_crossover(
          bundle.profile, bundle.params, no.value("t_max", 3.0), no.value("n", 300));
      result["classical_dominates_from"] = t_star;
      line += "; classical hyperbolic bound dominates from t = " + ser::format_double(t_star);
    }
    std::cout << line << "\n";
    result["summary"] = line;
    run.add("classify.json", json(result).dump(2) + "\n");
    run.finish();
    return 0;
  });
}

int run_simulate(const CliOptions& opts) {
  return guarded("simulate", [&] {
    Run run = open_run(opts, {"profile", "coefficients", "simulate"});
    const ser::ProfileBundle bundle = load_profile(run.config);
    const auto icfg = load_integrator(run.config);
    const auto coeffs = load_coefficients(run.config, bundle, icfg);
    const json& sim = run.config.at("simulate");
    const int samples = sim.value("samples", 200);
    const bool closed_cols = sim.value("closed_form_columns", true);
    const std::string data_kind = sim.value("data", "canonical");

    for (const auto& nc : coeffs) {
      for (const auto& jl : sim.at("lambdas")) {
        const double lambda = jl.get<double>();
        const double t0 = std::max(bundle.params.t0, nc.coeff.domain_start());
        const double t_end = load_horizon(run.config, opts, sim.value("t_end", t0 + 100.0));
        mode_dynamics::ModeState s0{t0, 0.0, std::pow(nc.coeff.c_inf(), 0.25), lambda};
        const bool has_closed =
            nc.coeff.kind() == coefficients::CoeffKind::no_way ||
            (nc.coeff.blocks().size() == 1 && nc.coeff.blocks().front().eps_is_constant &&
             lambda == nc.coeff.blocks().front().lambda);
        SmoothFunction eps_for_closed;
        double m_closed = 1.0;
        if (has_closed) {
          if (nc.coeff.kind() == coefficients::CoeffKind::no_way) {
            eps_for_closed = SmoothFunction(
                [](double t) { return 1.0 / t; }, [](double t) { return -1.0 / (t * t); });
            m_closed = 1.0;
          } else {
            eps_for_closed =
                SmoothFunction::constant(nc.coeff.blocks().front().eps_value);
            m_closed = nc.coeff.blocks().front().m;
          }
        }
        if (data_kind == "closed_form" && has_closed) {
          auto [w0, wp0] = mode_dynamics::closed_form_dgcs(m_closed, lambda, eps_for_closed, t0, t0);
          s0.u = w0;
          s0.v = wp0;
        }
        const std::vector<double> ts = geometric_times(t0, t_end, samples);
        mode_dynamics::EnergyTrace trace =
            mode_dynamics::integrate_mode(nc.coeff, lambda, s0, t_end, icfg, ts);
        std::string csv = ser::trace_to_csv(trace);
        if (closed_cols && has_closed && data_kind == "closed_form") {
          std::string merged = "t,u,v,E_kow,E_tar,tarama_valid,w_closed,wp_closed\n";
          std::istringstream lines(csv);
          std::string header;
          std::getline(lines, header);
          std::string row;
          size_t i = 0;
          while (std::getline(lines, row) && i < trace.samples.size()) {
            const double t = trace.samples[i].t;
            auto [w, wp] = mode_dynamics::closed_form_dgcs(m_closed, lambda, eps_for_closed, t0, t);
            merged += row + "," + ser::format_double(w) + "," + ser::format_double(wp) + "\n";
            ++i;
          }
          csv = merged;
        }
        run.add(nc.name + "_lambda" + ser::format_double(lambda) + ".csv", csv);
        std::cout << "simulate " << nc.name << " lambda=" << lambda << ": " << trace.stats.steps
                  << " steps\n";
      }
      const std::vector<double> cts = geometric_times(
          std::max(bundle.params.t0, nc.coeff.domain_start()),
          load_horizon(run.config, opts, bundle.params.t0 + 100.0), samples);
      run.add(nc.name + "_coefficient.csv", ser::coefficient_trace_csv(nc.coeff, cts));
    }
    run.finish();
    return 0;
  });
}

int run_certify(const CliOptions& opts) {
  return guarded("certify", [&] {
    Run run = open_run(opts, {"profile", "coefficients", "sweep"});
    const ser::ProfileBundle bundle = load_profile(run.config);
    const auto icfg = load_integrator(run.config);
    const auto coeffs = load_coefficients(run.config, bundle, icfg);
    const json& js = run.config.at("sweep");
    const double horizon = load_horizon(run.config, opts, 10.0 * bundle.params.t0 + 100.0);
    bounds::SweepGrid grid = bounds::default_sweep(
        bundle.params, js.value("lambda_min", 1e-2), js.value("lambda_max", 1e2),
        js.value("lambda_count", 20), horizon, js.value("t_count", 30));
    grid.slack = js.value("slack", 0.05);
    const int workers =
        opts.workers > 0 ? opts.workers : run.config.value("workers", 0);

    bool all_ok = true;
    for (const auto& nc : coeffs) {
      bounds::BoundReport report =
          bounds::certify(nc.coeff, bundle.profile, bundle.params, grid, icfg, workers);
      run.add(nc.name + "_bounds.json", ser::bound_report_to_json(report) + "\n");
      run.add(nc.name + "_bounds.csv", ser::bound_report_to_csv(report));
      run.worst_margins[nc.name] = report.worst_margin;
      std::cout << "certify " << nc.name << ": " << (report.all_pass ? "PASS" : "FAIL")
                << " worst_margin=" << report.worst_margin
                << " saturation=" << report.max_saturation << "\n";
      all_ok = all_ok && report.all_pass;
    }
    run.finish();
    return all_ok ? 0 : 1;
  });
}

int run_counterexample(const CliOptions& opts) {
  return guarded("counterexample", [&] {
    Run run = open_run(opts, {"profile"});
    const ser::ProfileBundle bundle = load_profile(run.config);
    const auto icfg = load_integrator(run.config);
    json jc = run.config.value("counterexample", json::object());
    counterexample::ScheduleOptions sopts;
    sopts.lambda0 = jc.value("lambda0", 0.0);
    sopts.ode_cap = jc.value("ode_cap", 1e7);
    sopts.ode_check = jc.value("ode_check", true);
    sopts.K_cap = jc.value("K_cap", 3);
    sopts.icfg = icfg;
    const int K = jc.value("K", 2);

    counterexample::Schedule sched =
        counterexample::build_schedule(K, bundle.profile, bundle.params, sopts);
    std::vector<counterexample::Band> bands;
    const bool do_band = jc.value("band_search", true);
    const double budget = jc.value("budget_steps", 2e8);
    for (int k = 1; k <= static_cast<int>(sched.blocks.size()); ++k) {
      if (do_band) {
        bands.push_back(counterexample::band_search(k, sched, icfg, sopts.ode_cap, budget));
      } else {
        counterexample::Band b;
        b.k = k;
        b.lambda_lo = b.lambda_hi = sched.blocks[static_cast<size_t>(k - 1)].lambda;
        b.note = "band search disabled";
        bands.push_back(b);
      }
    }
    counterexample::GrowthReport growth =
        counterexample::verify_growth(sched, bands, icfg, sopts.ode_cap);

    run.add("schedule.json", ser::schedule_to_json(sched, bands) + "\n");
    run.add("growth.json", ser::growth_report_to_json(growth) + "\n");
    run.add("growth.csv", ser::growth_report_to_csv(growth));
    run.add("coefficient.json", ser::coefficient_to_json(sched.glued) + "\n");
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : growth.rows) {
      std::cout << "k=" << row.k << " b_k=" << row.b_k << " lambda_k=" << row.lambda_k
                << " M(b_k)=" << row.M_b << " Eu(b_k)>=" << row.Eu_b.lo << " direct="
                << (row.direct_status > 0 ? "PASS" : (row.direct_status < 0 ? "FAIL" : "OPEN"))
                << " margin_log=" << row.direct_margin_log << "\n";
      worst = std::min(worst, row.direct_margin_log);
    }
    std::cout << "Eu(t0)=" << growth.Eu_t0 << " k_min_empirical=" << growth.k_min_empirical
              << " k_min_analytic=" << growth.k_min_analytic << "\n";
    run.worst_margins["growth"] = worst;
    run.finish();
    return 0;
  });
}

int run_report(const CliOptions& opts) {
  return guarded("report", [&] {
    // Consolidates artifacts already present in the output directory.
    Run run;
    run.config_bytes = opts.config_path.empty() ? std::string("{}") : read_file(opts.config_path);
    run.out = opts.out_dir;
    std::string summary;
    int artifacts = 0;
    if (fs::exists(run.out)) {
      std::vector<fs::path> paths;
      for (const auto& entry : fs::directory_iterator(run.out)) paths.push_back(entry.path());
      std::sort(paths.begin(), paths.end());
      for (const auto& path : paths) {
        const std::string name = path.filename().string();
        if (name.size() > 12 && name.substr(name.size() - 12) == "_bounds.json") {
          const json j = json::parse(read_file(path.string()));
          const std::string stem = name.substr(0, name.size() - 12);
          summary += stem + ": " + (j.at("all_pass").get<bool>() ? "PASS" : "FAIL") +
                     ", worst margin " + ser::format_double(j.at("worst_margin").get<double>()) +
                     ", saturation " + ser::format_double(j.at("max_saturation").get<double>()) +
                     "\n";
          std::string overlay = "lambda,t,sqrt_M,log_ratio,log_env_lower,log_env_upper\n";
          for (const auto& row : j.at("rows")) {
            overlay += ser::format_double(row.at("lambda").get<double>()) + "," +
                       ser::format_double(row.at("t").get<double>()) + "," +
                       ser::format_double(row.at("sqrt_M").get<double>()) + "," +
                       ser::format_double(std::log(row.at("ratio").get<double>())) + "," +
                       ser::format_double(-std::log(row.at("env_upper").get<double>())) + "," +
                       ser::format_double(std::log(row.at("env_upper").get<double>())) + "\n";
          }
          run.add("overlay_" + stem + ".csv", overlay);
          ++artifacts;
        } else if (name == "growth.json") {
          const json j = json::parse(read_file(path.string()));
          summary += "growth: Eu(t0) = " + ser::format_double(j.at("Eu_t0").get<double>()) +
                     ", k_min_empirical = " + std::to_string(j.at("k_min_empirical").get<int>()) +
                     "\n";
          std::string overlay = "k,sqrt_M_b,log_Eu_lo,envelope_log\n";
          for (const auto& row : j.at("rows")) {
            overlay += std::to_string(row.at("k").get<int>()) + "," +
                       ser::format_double(std::sqrt(row.at("M_b").get<double>())) + "," +
                       ser::format_double(std::log(std::max(row.at("Eu_b_lo").get<double>(),
                                                            1e-300))) +
                       "," + ser::format_double(row.at("envelope_log").get<double>()) + "\n";
          }
          run.add("growth_overlay.csv", overlay);
          ++artifacts;
        }
      }
    }
    if (artifacts == 0) summary = "no artifacts found\n";
    run.add("summary.txt", summary);
    std::cout << summary;
    run.finish();
    return 0;
  });
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"energy growth certification for wave equations with time-dependent speed"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  CliOptions opts;

  auto add_common = [&opts](CLI::App* cmd, bool config_required = true) {
    cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
        ->required(config_required);
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--workers", opts.workers, "worker threads (0: hardware)");
    cmd->add_option("--horizon", opts.horizon, "time horizon override");
    cmd->add_flag("--seedless", opts.seedless, "all runs are deterministic; documents this");
  };

  int rc = 0;
  auto* classify = app.add_subcommand("classify", "power-law classification of a profile");
  add_common(classify);
  classify->callback([&] { rc = run_classify(opts); });
  auto* simulate = app.add_subcommand("simulate", "integrate modes and export traces");
  add_common(simulate);
  simulate->callback([&] { rc = run_simulate(opts); });
  auto* certify = app.add_subcommand("certify", "sweep energies against the growth envelopes");
  add_common(certify);
  certify->callback([&] { rc = run_certify(opts); });
  auto* cex = app.add_subcommand("counterexample", "build and verify the growing construction");
  add_common(cex);
  cex->callback([&] { rc = run_counterexample(opts); });
  auto* report = app.add_subcommand("report", "consolidate artifacts into summaries and overlays");
  add_common(report, false);
  report->callback([&] { rc = run_report(opts); });

  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return rc;
}

}  // namespace wavegec::harness
