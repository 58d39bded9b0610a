#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "milcarb/keyval.hpp"
#include "milcarb/types.hpp"

namespace milcarb {

// One country-year row. Spending shares are stored as fractions of GDP;
// conversion to percentage points happens only at the shock/IRF boundary
// (exactly x100). Missing values are NaN.
struct PanelObservation {
  std::string country;
  int year = 0;
  double mil_share = 0;     // M, fraction of nominal GDP
  double nominal_gdp = 0;
  double real_gdp = 0;      // Y^R
  double deflator = 0;
  double emissions = 0;     // CO2e mass
  double energy_use = 0;    // tons coal equivalent
  double gdp_pc = 0;
  double exports = 0;
  double imports = 0;
  double democracy = 0;     // index in [0,1]
  double steel = 0;
  double patents_total = 0;
  double patents_green = 0;
};

enum class Field {
  MilShare,
  NominalGdp,
  RealGdp,
  Deflator,
  Emissions,
  EnergyUse,
  GdpPc,
  Exports,
  Imports,
  Democracy,
  Steel,
  PatentsTotal,
  PatentsGreen,
};

double field_value(const PanelObservation& obs, Field f);
const char* field_name(Field f);
std::optional<Field> field_from_name(const std::string& name);

struct LoadDiagnostic {
  int csv_row = 0;  // 1-based, header is row 1
  std::string country;
  int year = 0;
  std::string message;
  bool rejected = false;  // rejected row vs. flagged warning (year gap)
};

// Immutable after construction; all operations on it are pure functions.
class PanelDataset {
 public:
  static PanelDataset from_rows(std::vector<PanelObservation> rows,
                                std::vector<LoadDiagnostic> diagnostics = {});

  const std::vector<PanelObservation>& rows() const { return rows_; }
  const std::vector<std::string>& countries() const { return countries_; }
  const std::vector<int>& years() const { return years_; }
  const std::vector<LoadDiagnostic>& diagnostics() const { return diagnostics_; }

  const PanelObservation* find(const std::string& country, int year) const;
  // Year-keyed series of one field for one country; NaN entries are skipped.
  std::map<int, double> series(const std::string& country, Field f) const;
  PanelDataset restrict_countries(const std::vector<std::string>& keep) const;

 private:
  std::vector<PanelObservation> rows_;
  std::vector<std::string> countries_;
  std::vector<int> years_;
  std::vector<LoadDiagnostic> diagnostics_;
  std::map<std::pair<std::string, int>, int> index_;
};

// Loads a CSV panel. The schema maps canonical field names (country, year,
// mil_share, nominal_gdp, real_gdp, deflator, emissions, energy_use, gdp_pc,
// exports, imports, democracy, steel, patents_total, patents_green) to the
// file's column headers; an empty schema uses the canonical names directly.
// Rows violating value invariants are rejected with row-level diagnostics;
// duplicate (country, year) keys, missing columns and non-numeric cells are
// hard errors. Year gaps inside a country's coverage are flagged.
PanelDataset load_panel(const std::string& path, const KeyValueFile& schema);
PanelDataset load_panel(const std::string& path);

// Fitted values of a least-squares regression of the series on {1, t, t^2}
// (t centered for conditioning). Requires >= 4 observations.
std::map<int, double> quadratic_trend(const std::map<int, double>& series);

enum class TransformKind { LevelShare, GordonKrenn, HallBarroRedlick };

struct TransformedSeries {
  std::string country;
  std::map<int, double> values;
  TransformKind kind = TransformKind::LevelShare;
};

// Gordon-Krenn: real military spending over a quadratic trend of real GDP,
// m*_t / Y*_t with m*_t = mil_share * nominal_gdp / deflator.
TransformedSeries gordon_krenn(const PanelDataset& panel,
                               const std::string& country);

// Hall-Barro-Redlick: (m*_t - m*_{t-1}) / Y^R_{t-1}. The first year of each
// country is absent from the output; year gaps are an error.
TransformedSeries hall_barro_redlick(const PanelDataset& panel,
                                     const std::string& country);

// The raw spending share as a TransformedSeries (kind = LevelShare).
TransformedSeries level_share(const PanelDataset& panel,
                              const std::string& country);

}  // namespace milcarb
