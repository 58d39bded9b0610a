#pragma once

#include <string>
#include <vector>

#include "milcarb/calibration.hpp"
#include "milcarb/hat_model.hpp"
#include "milcarb/scenario.hpp"
#include "milcarb/types.hpp"

namespace milcarb {

struct SteadyOptions {
  double tol = 1e-12;       // 2-norm of the full residual vector
  int max_iter = 200;
  int max_backtrack = 30;   // halvings in the line search
  double fd_step = 1e-6;    // central differences in log coordinates
  const HatState* initial = nullptr;  // warm start; defaults to all ones
};

struct SteadySolution {
  HatState state;
  Vec g_hat;
  double emissions = 1.0;   // E-hat
  double real_gdp = 1.0;    // Y-hat
  double intensity = 1.0;   // E-hat / Y-hat
  double residual_norm = 0.0;
  int iterations = 0;
};

// Damped Newton on the steady residuals in log space (all-ones start,
// backtracking line search on the residual norm). The value-added price
// rows are implied by the factor demands and are dropped from the square
// Newton system; convergence is judged on the full residual vector.
SteadySolution solve_steady(const Calibration& calib, const Vec& g_hat,
                            const SteadyOptions& opts = {});

struct TransitionOptions {
  int T = 200;
  int max_T = 800;              // automatic doubling limit
  double terminal_tol = 1e-6;   // max-norm gap of the final period
  double fd_step = 1e-6;
};

struct TransitionSolution {
  std::vector<HatState> path;  // t = 0..T; capital predetermined, K_0 = 1
  Vec emissions, real_gdp, intensity;  // per period
  GovernmentPath g_path;
  HatState terminal;
  int T = 0;
  double terminal_gap = 0.0;
  double linear_residual = 0.0;  // max stacked-system residual, diagnostics
};

// First-order perfect-foresight transition: central-difference blocks of the
// period residuals at the initial steady state, stacked over t = 0..T with
// K_0 = 1 and the Euler's last-period forward references pinned to the
// terminal steady state (initial one for rho < 1, post-shock one for
// rho = 1). The block-tridiagonal system is solved by forward elimination.
// T doubles automatically (up to max_T) when the final period has not
// settled to the terminal state.
TransitionSolution solve_transition(const Calibration& calib,
                                    const ScenarioSpec& scenario,
                                    const TransitionOptions& opts = {});

struct ShockDecomposition {
  SteadySolution weapon_only;
  SteadySolution energy_only;
  SteadySolution joint;
  double nonlinearity_gap = 0.0;  // (sum of component deltas) - joint delta
};

// Solves the permanent shock with each component switched off in turn.
ShockDecomposition decompose_shocks(const Calibration& calib,
                                    const ScenarioSpec& scenario);

struct IndustryChange {
  std::string label;
  double output_change = 0.0;   // y-hat - 1 (steady) or peak deviation
  double capital_change = 0.0;  // K-hat - 1; transitions report K_{t+1}
  int output_peak_t = -1;       // transition only
  int capital_peak_t = -1;
  bool weapon = false;
  bool energy = false;
};

// Per-industry changes, sorted by output change (descending), with the
// weapon/energy sets flagged. Transition reports use peak deviations; the
// capital entry dated t is the stock chosen at t (used in t + 1).
std::vector<IndustryChange> industry_report(const SteadySolution& sol,
                                            const Calibration& calib);
std::vector<IndustryChange> industry_report(const TransitionSolution& sol,
                                            const Calibration& calib);

struct SweepRow {
  std::string preset;
  double E_pp = 0.0;
  double emissions_pct = 0.0;
  double intensity_pct = 0.0;
  double real_gdp_pct = 0.0;
};

// Permanent-shock sweep over a grid of shock sizes for each preset, warm
// starting along the grid. Rows ordered by (preset order given, then E).
std::vector<SweepRow> sweep_steady(const Calibration& calib,
                                   const std::vector<std::string>& presets,
                                   double e_from, double e_to, double e_step);

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows);
void write_transition_csv(const std::string& path,
                          const TransitionSolution& sol,
                          const Calibration& calib);

}  // namespace milcarb
