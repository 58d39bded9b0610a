#pragma once

#include <optional>
#include <string>

#include "milcarb/solvers.hpp"

namespace milcarb {

// Bundled scenario outcome: emissions, real GDP and intensity ratios, the
// log decomposition ln E = ln Y + ln intensity, the per-industry table and
// (optionally) dollar damages. Damage figures are steady-state annual flows;
// the transition path is not integrated.
struct EmissionsReport {
  std::string scenario_label;
  double E_pp = 0.0;
  double PM = 1.0, EM = 1.0;
  double emissions_hat = 1.0;
  double real_gdp_hat = 1.0;
  double intensity_hat = 1.0;
  double ln_emissions = 0.0;
  double ln_real_gdp = 0.0;
  double ln_intensity = 0.0;
  std::vector<IndustryChange> industries;
  std::optional<DamageResult> damages;
  double residual_norm = 0.0;
  int iterations = 0;

  std::string to_json() const;
};

EmissionsReport emissions_report(const SteadySolution& sol,
                                 const ScenarioSpec& scenario,
                                 const Calibration& calib,
                                 const std::optional<DamageSpec>& damages);

}  // namespace milcarb
