#pragma once

#include <string>
#include <vector>

#include "wavegec/bounds.hpp"
#include "wavegec/coefficients.hpp"
#include "wavegec/counterexample.hpp"
#include "wavegec/mode_dynamics.hpp"
#include "wavegec/rates.hpp"

// JSON documents and CSV tables for the domain types.  JSON round-trips
// doubles exactly; CSV uses 17 significant digits, so downstream comparisons
// are numeric but outputs stay byte-deterministic on one platform.
namespace wavegec::serialization {

struct ProfileBundle {
  rates::ClassParams params;
  rates::RateProfile profile;
};

// {t0, lambda1, lambda2, lambda3?, c_inf?, gamma: {form:"power", beta} |
//  {form:"table", knots}, stab: {form:"power", alpha} | {form:"table", knots}}
ProfileBundle profile_from_json(const std::string& text);
std::string profile_to_json(const rates::ClassParams& params, const rates::RateProfile& profile);

std::string coefficient_to_json(const coefficients::Coefficient& coeff);
coefficients::Coefficient coefficient_from_json(const std::string& text);

std::string trace_to_csv(const mode_dynamics::EnergyTrace& trace);
std::string coefficient_trace_csv(const coefficients::Coefficient& coeff,
                                  const std::vector<double>& times);

std::string bound_report_to_json(const bounds::BoundReport& report);
std::string bound_report_to_csv(const bounds::BoundReport& report);

std::string schedule_to_json(const counterexample::Schedule& schedule,
                             const std::vector<counterexample::Band>& bands);
std::string growth_report_to_json(const counterexample::GrowthReport& report);
std::string growth_report_to_csv(const counterexample::GrowthReport& report);

// Canonical full-precision decimal rendering used by every CSV writer.
std::string format_double(double v);

// FNV-1a 64-bit over raw bytes, for config hashes and artifact digests.
unsigned long long fnv1a(const std::string& bytes);

}  // namespace wavegec::serialization
