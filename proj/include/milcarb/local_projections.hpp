#pragma once

#include <map>
#include <string>
#include <vector>

#include "milcarb/panel.hpp"
#include "milcarb/shocks.hpp"
#include "milcarb/types.hpp"

namespace milcarb {

struct ControlSpec {
  Field field;
  enum class Kind { LogDiff, Level } kind = Kind::LogDiff;
  int lag = 1;  // value dated t - lag
};

std::vector<ControlSpec> default_lp_controls();

struct LpSpec {
  int horizon_T = 15;
  int lags_l = 2;  // lags of the outcome's first difference
  std::vector<ControlSpec> controls = default_lp_controls();
  bool country_fe = true;
  bool year_fe = true;
  double ci_level = 0.68;
  int dk_lags = 2;
};

struct OutcomeSpec {
  Field field;
  bool log = true;
  // Unit conversion for level outcomes (e.g. x100 turns a GDP-share outcome
  // into percentage points). Log outcomes are always reported x100 so the
  // coefficients read as percent.
  double scale = 1.0;
};

struct IrfResult {
  std::vector<int> horizons;
  Vec beta;   // percent (or outcome units) per 1 p.p. shock
  Vec se;
  Vec ci_lo, ci_hi;
  std::vector<int> n_obs;
  double z = 0.0;          // normal quantile used for the bands
  long log_zero_drops = 0; // outcome values dropped by the log transform
};

// Panel local projection of the h-step long difference of the outcome on the
// shock, country and year fixed effects (explicit dummies), lagged controls,
// and lags of the outcome's first difference. Driscoll-Kraay inference.
IrfResult estimate_lp(const PanelDataset& panel,
                      const std::vector<ShockSeries>& shocks,
                      const OutcomeSpec& outcome, const LpSpec& spec);

// Driscoll-Kraay covariance: (X'X)^{-1} S (X'X)^{-1}, where
// S = Omega_0 + sum_{j=1..m} w_j (Omega_j + Omega_j'),
// Omega_j = sum_t h_t h_{t-j}', h_t = sum_{i at time t} x_it u_it,
// with Bartlett weights w_j = 1 - j/(m+1). Time lags are positional over the
// sorted distinct time values.
Mat driscoll_kraay_cov(const Vec& residuals, const Mat& regressors,
                       const std::vector<int>& time_index, int lags = 2);

enum class IntensityGroup { High, Low };

struct GroupClassification {
  std::map<std::string, IntensityGroup> group;
};

// Median split on per-country time-average emissions intensity
// (emissions / real GDP). Countries at or below the median are LOW.
GroupClassification classify_emission_intensity(const PanelDataset& panel);

// Single stacked regression with every regressor (year effects included)
// interacted with the group indicator. Returns (HIGH, LOW) IRFs.
std::pair<IrfResult, IrfResult> split_lp(const PanelDataset& panel,
                                         const std::vector<ShockSeries>& shocks,
                                         const OutcomeSpec& outcome,
                                         const LpSpec& spec,
                                         const GroupClassification& groups);

// Common-shock spillover regression: the source country's shock series is
// replicated across every panel country. Year fixed effects must be
// disabled or the common shock is absorbed (collinearity error).
IrfResult spillover_lp(const PanelDataset& panel,
                       const ShockSeries& source_shocks,
                       const OutcomeSpec& outcome, const LpSpec& spec);

void write_irf_csv(const std::string& path, const IrfResult& irf);
void write_irf_plotdata_csv(const std::string& path, const IrfResult& irf);

}  // namespace milcarb
