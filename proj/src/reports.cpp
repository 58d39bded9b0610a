#include "milcarb/reports.hpp"

#include <cmath>

#include <json.hpp>

namespace milcarb {

EmissionsReport emissions_report(const SteadySolution& sol,
                                 const ScenarioSpec& scenario,
                                 const Calibration& calib,
                                 const std::optional<DamageSpec>& damages) {
  EmissionsReport rep;
  rep.scenario_label = scenario.label;
  rep.E_pp = scenario.resolved_E_pp(calib.base_mil_share);
  auto mult = scenario_multipliers(scenario, calib);
  rep.PM = mult.PM;
  rep.EM = mult.EM;
  rep.emissions_hat = sol.emissions;
  rep.real_gdp_hat = sol.real_gdp;
  rep.intensity_hat = sol.intensity;
  rep.ln_emissions = std::log(sol.emissions);
  rep.ln_real_gdp = std::log(sol.real_gdp);
  rep.ln_intensity = std::log(sol.intensity);
  rep.industries = industry_report(sol, calib);
  rep.residual_norm = sol.residual_norm;
  rep.iterations = sol.iterations;
  if (damages)
    rep.damages = scc_damages(100.0 * (sol.emissions - 1.0), *damages);
  return rep;
}

std::string EmissionsReport::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario_label;
  j["E_pp"] = E_pp;
  j["PM"] = PM;
  j["EM"] = EM;
  j["emissions_hat"] = emissions_hat;
  j["real_gdp_hat"] = real_gdp_hat;
  j["intensity_hat"] = intensity_hat;
  j["emissions_pct"] = 100.0 * (emissions_hat - 1.0);
  j["real_gdp_pct"] = 100.0 * (real_gdp_hat - 1.0);
  j["intensity_pct"] = 100.0 * (intensity_hat - 1.0);
  // ln E = ln Y + ln intensity, by construction.
  j["ln_emissions"] = ln_emissions;
  j["ln_real_gdp"] = ln_real_gdp;
  j["ln_intensity"] = ln_intensity;
  j["residual_norm"] = residual_norm;
  j["iterations"] = iterations;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : industries) {
    nlohmann::json row;
    row["industry"] = r.label;
    row["output_pct"] = 100.0 * r.output_change;
    row["capital_pct"] = 100.0 * r.capital_change;
    row["weapon"] = r.weapon;
    row["energy"] = r.energy;
    rows.push_back(row);
  }
  j["industries"] = rows;
  if (damages) {
    j["damages_per_year"] = damages->per_year;
    j["damages_share_of_gdp"] = damages->share_of_gdp;
    j["damages_note"] =
        "steady-state annual flow; transition path not integrated";
  }
  return j.dump(2);
}

}  // namespace milcarb
