#pragma once

#include <optional>
#include <string>
#include <vector>

#include "milcarb/keyval.hpp"
#include "milcarb/types.hpp"

namespace milcarb {

// Industry-by-industry use table in purchaser values. Matrices are oriented
// (producer row, user column) throughout.
struct UseTable {
  int n = 0;
  std::vector<std::string> labels;
  Mat intermediate;       // p_i x_ij
  Vec labor_comp;         // w L_i
  Vec capital_comp;       // r K_i
  Vec household_final;    // p_i f_i
  Vec government_final;   // p_i G_i
  Vec investment_final;   // total deliveries to investment
  Vec gross_output;       // p_i y_i

  // gross_output_i vs. the sum of uses, relative.
  Vec balance_gap() const;
};

struct InvestmentNetwork {
  int year = 0;
  Mat flows;  // p_i i_ij, producer i -> investing industry j
};

struct BalanceReport {
  int adjusted_rows = 0;
  double max_rel_gap = 0.0;
  std::vector<std::string> notes;
};

struct CalibrationConfig {
  double beta_disc = 0.98;
  double frisch = 0.4;
  double maintenance_share = 0.125;
  std::vector<std::string> weapon_industries;
  std::vector<std::string> energy_industries;
  double base_mil_share = 0.033;
  std::optional<double> S_P_override, S_E_override;
  int target_year = 0;  // 0 = latest network year
};

// Full parameter set of the production-network model. Shares only; scale
// invariant to common rescaling of currency units.
struct Calibration {
  int n = 0;
  std::vector<std::string> labels;
  Mat Delta;          // sales shares of gross output, (producer, user)
  Mat iota;           // investment delivery shares of gross output
  Mat omega;          // intermediate input shares, columns sum to 1 per user
  Mat chi;            // investment input shares, columns sum to 1 per investor
  Vec phi;            // household final share of gross output
  Vec gamma;          // government final share of gross output
  Vec lambda;         // labor compensation shares, sum to 1
  Vec alpha;          // labor share of value added
  Vec theta;          // value-added share of gross output
  Vec delta_dep;      // depreciation rates
  Vec beta_cons;      // consumption expenditure shares, sum to 1
  Vec eps_ind;        // industry scope-1 emission shares
  double eps_hh = 0.0;
  double eps_govt = 0.0;
  double beta_disc = 0.98;
  double frisch = 0.4;
  std::vector<int> weapon_set, energy_set;
  double base_mil_share = 0.033;
  double S_P = 0.0, S_E = 0.0;
  Vec output_weight;  // base-period p y, normalized to sum 1 (Laspeyres weights)

  int index_of(const std::string& label) const;  // -1 if absent
  void validate(double tol = 1e-8) const;        // throws DataError
  std::string to_json() const;
};

// Recovers intermediate flows from a total-requirements matrix H:
// A = I - H^{-1}, flows_ij = A_ij * gross_output_j. Small negative entries
// (> -1e-8 relative) are clipped to zero; anything below that is an error.
Mat invert_total_requirements(const Mat& H, const Vec& gross_output);

// Maintenance adjustment: each column of chi is rescaled to (1 - share) and
// share is added on the diagonal, so every industry procures `share` of its
// investment from itself. iota is adjusted consistently (column investment
// totals preserved); gross_output supplies the value weights. The adjusted
// chi must be invertible.
void maintenance_adjustment(Mat& chi, Mat& iota, const Vec& gross_output,
                            double share = 0.125);

struct EmissionLevels {
  Vec industry;      // scope-1 levels by industry
  double household = 0.0;
  double government = 0.0;
};

// Builds the Calibration from a use table, yearly investment networks,
// per-year depreciation vectors and emission levels. chi is averaged over
// the network years first and maintenance-adjusted afterwards; iota comes
// from the target year's (adjusted) network. The use table's investment
// column is replaced by the adjusted network's deliveries; any remaining
// row imbalance is spread proportionally over household and government
// final demand and logged in the report.
Calibration build_calibration(const UseTable& use,
                              const std::vector<InvestmentNetwork>& networks,
                              const Mat& depreciation,  // (years x n)
                              const EmissionLevels& emissions,
                              const CalibrationConfig& config,
                              BalanceReport* report = nullptr);

// Regenerates a balanced synthetic use table and a consistent investment
// network from a calibration (for round-trip checks and fixture synthesis).
UseTable synthesize_use_table(const Calibration& calib,
                              const Vec& gross_output);
Mat synthesize_investment_flows(const Calibration& calib,
                                const Vec& gross_output);

// Many-to-one industry aggregation: flows summed, labels taken from the
// target index list.
UseTable aggregate_use_table(const UseTable& use,
                             const std::vector<int>& target_of_source,
                             const std::vector<std::string>& target_labels);

// Industry contraction read from mapping.csv (columns: source,
// target_index, optional target_label). target_index is 1-based.
struct IndustryMapping {
  std::vector<int> target_of_source;  // aligned to the use table rows
  std::vector<std::string> target_labels;
};
IndustryMapping read_mapping_csv(const std::string& path,
                                 const std::vector<std::string>& source_labels);

// Directory loader: expects use_table.csv, investment_network_<YYYY>.csv,
// depreciation.csv, emissions_shares.csv and config.txt under `dir`. When
// mapping.csv is present every input is contracted onto the target
// partition first (flows and emission levels summed, depreciation averaged
// with capital-compensation weights).
Calibration load_calibration_dir(const std::string& dir,
                                 BalanceReport* report = nullptr);

UseTable read_use_table_csv(const std::string& path);
InvestmentNetwork read_investment_network_csv(const std::string& path, int year);

}  // namespace milcarb
