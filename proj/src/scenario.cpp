#include "milcarb/scenario.hpp"

#include <cmath>
#include <sstream>

#include "milcarb/errors.hpp"

namespace milcarb {

double ScenarioSpec::resolved_E_pp(double base_mil_share) const {
  if (target_share_pct)
    return *target_share_pct - 100.0 * base_mil_share;
  return E_pp;
}

void ScenarioSpec::validate(double base_mil_share) const {
  if (s_P < 0 || s_E < 0 || s_P + s_E > 1.0)
    throw ConfigError("scenario: need s_P, s_E >= 0 and s_P + s_E <= 1");
  if (!(rho > 0.0 && rho <= 1.0))
    throw ConfigError("scenario: rho must be in (0, 1]");
  if (t0 < 0) throw ConfigError("scenario: t0 must be >= 0");
  double e = resolved_E_pp(base_mil_share);
  if (e <= -100.0 * base_mil_share)
    throw ConfigError("scenario: E would push the spending share below zero");
}

ScenarioSpec scenario_preset(const std::string& label, double E_pp) {
  ScenarioSpec s;
  s.label = label;
  s.E_pp = E_pp;
  if (label == "baseline") {
    s.s_P = 0.3;
    s.s_E = 0.05;
  } else if (label == "personnel") {
    s.s_P = 0.2;
    s.s_E = 0.02;
  } else if (label == "material") {
    s.s_P = 0.4;
    s.s_E = 0.1;
  } else if (label == "custom") {
    // caller fills s_P / s_E
  } else {
    throw ConfigError("unknown scenario preset: " + label);
  }
  return s;
}

ScenarioSpec load_scenario(const KeyValueFile& kv) {
  std::string preset = kv.get_or("preset", "custom");
  ScenarioSpec s = scenario_preset(preset, kv.get_double_or("E_pp", 1.0));
  if (preset == "custom") {
    s.s_P = kv.get_double("s_P");
    s.s_E = kv.get_double("s_E");
  }
  s.rho = kv.get_double_or("rho", 1.0);
  s.t0 = kv.get_int_or("t0", 0);
  s.S_P = kv.maybe_double("S_P");
  s.S_E = kv.maybe_double("S_E");
  if (kv.has("target_share_pct"))
    s.target_share_pct = kv.get_double("target_share_pct");
  return s;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  return load_scenario(KeyValueFile::load(path));
}

double procurement_multiplier(double S_P, double s_P, double E_frac) {
  if (S_P <= 0.0)
    throw DataError(
        "procurement multiplier: zero base procurement share (unresolvable "
        "hat)");
  return (S_P + s_P * E_frac) / S_P;
}

double energy_multiplier(double S_E, double s_E, double E_frac) {
  if (S_E <= 0.0)
    throw DataError(
        "energy multiplier: zero base energy share (unresolvable hat)");
  return (S_E + s_E * E_frac) / S_E;
}

ScenarioMultipliers scenario_multipliers(const ScenarioSpec& scenario,
                                         const Calibration& calib) {
  scenario.validate(calib.base_mil_share);
  double e_frac = scenario.resolved_E_pp(calib.base_mil_share) / 100.0;
  ScenarioMultipliers m;
  m.PM = procurement_multiplier(scenario.S_P.value_or(calib.S_P), scenario.s_P,
                                e_frac);
  m.EM = energy_multiplier(scenario.S_E.value_or(calib.S_E), scenario.s_E,
                           e_frac);
  return m;
}

GovernmentPath government_path(const ScenarioSpec& scenario,
                               const Calibration& calib, int T) {
  if (calib.weapon_set.empty() || calib.energy_set.empty())
    throw DataError("government_path: calibration has empty industry sets");
  auto m = scenario_multipliers(scenario, calib);
  GovernmentPath path;
  path.g = Mat::Ones(calib.n, T + 1);
  for (int t = scenario.t0; t <= T; ++t) {
    double decay = std::pow(scenario.rho, t - scenario.t0);
    for (int i : calib.weapon_set) path.g(i, t) = 1.0 + decay * (m.PM - 1.0);
    for (int i : calib.energy_set) path.g(i, t) = 1.0 + decay * (m.EM - 1.0);
  }
  return path;
}

Vec steady_g_hat(const ScenarioSpec& scenario, const Calibration& calib) {
  if (calib.weapon_set.empty() || calib.energy_set.empty())
    throw DataError("steady_g_hat: calibration has empty industry sets");
  auto m = scenario_multipliers(scenario, calib);
  Vec g = Vec::Ones(calib.n);
  for (int i : calib.weapon_set) g(i) = m.PM;
  for (int i : calib.energy_set) g(i) = m.EM;
  return g;
}

void DamageSpec::validate() const {
  if (scc <= 0 || base_emissions_t <= 0 || base_gdp <= 0)
    throw ConfigError("damage spec fields must all be positive");
}

DamageResult scc_damages(double delta_emissions_pct, const DamageSpec& spec) {
  spec.validate();
  DamageResult out;
  out.per_year = spec.base_emissions_t * (delta_emissions_pct / 100.0) * spec.scc;
  out.share_of_gdp = out.per_year / spec.base_gdp;
  return out;
}

}  // namespace milcarb
