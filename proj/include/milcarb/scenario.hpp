#pragma once

#include <optional>
#include <string>

#include "milcarb/calibration.hpp"
#include "milcarb/hat_model.hpp"
#include "milcarb/keyval.hpp"

namespace milcarb {

// A military-buildup scenario. E is quoted in percentage points of GDP at
// every interface and converted to a fraction before the multiplier
// formulas. Preset labels pin the composition (s_P, s_E): baseline
// (0.3, 0.05), personnel (0.2, 0.02), material (0.4, 0.1).
struct ScenarioSpec {
  double E_pp = 1.0;
  double s_P = 0.3;
  double s_E = 0.05;
  double rho = 1.0;  // persistence; 1 = permanent, 0.86 matches the estimated decay
  int t0 = 0;
  std::optional<double> S_P, S_E;  // override the calibration's base shares
  // When set, E is derived as the gap to this target spending share (in
  // percent of GDP), e.g. a Korean-War-peak level of 13.9.
  std::optional<double> target_share_pct;
  std::string label = "baseline";

  double resolved_E_pp(double base_mil_share) const;
  void validate(double base_mil_share) const;
};

ScenarioSpec scenario_preset(const std::string& label, double E_pp);
ScenarioSpec load_scenario(const KeyValueFile& kv);
ScenarioSpec load_scenario_file(const std::string& path);

// Procurement multiplier PM = (S_P + s_P E) / S_P with E a fraction of GDP.
double procurement_multiplier(double S_P, double s_P, double E_frac);
// Energy/fuel multiplier, defined analogously.
double energy_multiplier(double S_E, double s_E, double E_frac);

struct ScenarioMultipliers {
  double PM = 1.0, EM = 1.0;
};
ScenarioMultipliers scenario_multipliers(const ScenarioSpec& scenario,
                                         const Calibration& calib);

// Per-industry spending ratios: G_it = 1 + rho^{t-t0} (PM - 1) on weapon
// industries, 1 + rho^{t-t0} (EM - 1) on energy industries, 1 otherwise
// (and 1 before t0).
GovernmentPath government_path(const ScenarioSpec& scenario,
                               const Calibration& calib, int T);

// The permanent (rho = 1) spending vector; also the t0 impact vector.
Vec steady_g_hat(const ScenarioSpec& scenario, const Calibration& calib);

struct DamageSpec {
  double scc = 190.0;            // currency per ton CO2e
  double base_emissions_t = 0.0; // tons CO2e per year
  double base_gdp = 0.0;         // currency units
  void validate() const;
};

struct DamageResult {
  double per_year = 0.0;      // currency per year
  double share_of_gdp = 0.0;  // fraction
};

// Steady-state annual damage flow: base emissions x (delta/100) x SCC.
// Ignores the transition path to the new steady state.
DamageResult scc_damages(double delta_emissions_pct, const DamageSpec& spec);

}  // namespace milcarb
