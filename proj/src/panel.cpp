#include "milcarb/panel.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>
#include <sstream>

#include "milcarb/csv.hpp"
#include "milcarb/errors.hpp"
#include "milcarb/ols.hpp"

namespace milcarb {

double field_value(const PanelObservation& obs, Field f) {
  switch (f) {
    case Field::MilShare: return obs.mil_share;
    case Field::NominalGdp: return obs.nominal_gdp;
    case Field::RealGdp: return obs.real_gdp;
    case Field::Deflator: return obs.deflator;
    case Field::Emissions: return obs.emissions;
    case Field::EnergyUse: return obs.energy_use;
    case Field::GdpPc: return obs.gdp_pc;
    case Field::Exports: return obs.exports;
    case Field::Imports: return obs.imports;
    case Field::Democracy: return obs.democracy;
    case Field::Steel: return obs.steel;
    case Field::PatentsTotal: return obs.patents_total;
    case Field::PatentsGreen: return obs.patents_green;
  }
  return std::nan("");
}

const char* field_name(Field f) {
  switch (f) {
    case Field::MilShare: return "mil_share";
    case Field::NominalGdp: return "nominal_gdp";
    case Field::RealGdp: return "real_gdp";
    case Field::Deflator: return "deflator";
    case Field::Emissions: return "emissions";
    case Field::EnergyUse: return "energy_use";
    case Field::GdpPc: return "gdp_pc";
    case Field::Exports: return "exports";
    case Field::Imports: return "imports";
    case Field::Democracy: return "democracy";
    case Field::Steel: return "steel";
    case Field::PatentsTotal: return "patents_total";
    case Field::PatentsGreen: return "patents_green";
  }
  return "?";
}

std::optional<Field> field_from_name(const std::string& name) {
  static const Field all[] = {
      Field::MilShare, Field::NominalGdp, Field::RealGdp,  Field::Deflator,
      Field::Emissions, Field::EnergyUse, Field::GdpPc,    Field::Exports,
      Field::Imports,  Field::Democracy, Field::Steel,
      Field::PatentsTotal, Field::PatentsGreen};
  for (Field f : all)
    if (name == field_name(f)) return f;
  return std::nullopt;
}

PanelDataset PanelDataset::from_rows(std::vector<PanelObservation> rows,
                                     std::vector<LoadDiagnostic> diagnostics) {
  PanelDataset ds;
  ds.rows_ = std::move(rows);
  ds.diagnostics_ = std::move(diagnostics);
  std::sort(ds.rows_.begin(), ds.rows_.end(),
            [](const PanelObservation& a, const PanelObservation& b) {
              return std::tie(a.country, a.year) < std::tie(b.country, b.year);
            });
  std::set<std::string> cs;
  std::set<int> ys;
  for (size_t i = 0; i < ds.rows_.size(); ++i) {
    const auto& r = ds.rows_[i];
    auto key = std::make_pair(r.country, r.year);
    if (ds.index_.count(key)) {
      std::ostringstream os;
      os << "duplicate (country, year): (" << r.country << ", " << r.year << ")";
      throw DataError(os.str());
    }
    ds.index_[key] = static_cast<int>(i);
    cs.insert(r.country);
    ys.insert(r.year);
  }
  ds.countries_.assign(cs.begin(), cs.end());
  ds.years_.assign(ys.begin(), ys.end());

  // Flag year gaps inside each country's coverage. Gaps are not fatal but
  // lag construction never spans them.
  for (const auto& c : ds.countries_) {
    int prev = INT_MIN;
    for (const auto& r : ds.rows_) {
      if (r.country != c) continue;
      if (prev != INT_MIN && r.year != prev + 1) {
        LoadDiagnostic d;
        d.country = c;
        d.year = r.year;
        std::ostringstream os;
        os << "year gap: " << prev << " -> " << r.year;
        d.message = os.str();
        ds.diagnostics_.push_back(d);
      }
      prev = r.year;
    }
  }
  return ds;
}

const PanelObservation* PanelDataset::find(const std::string& country,
                                           int year) const {
  auto it = index_.find(std::make_pair(country, year));
  if (it == index_.end()) return nullptr;
  return &rows_[it->second];
}

std::map<int, double> PanelDataset::series(const std::string& country,
                                           Field f) const {
  std::map<int, double> out;
  for (const auto& r : rows_) {
    if (r.country != country) continue;
    double v = field_value(r, f);
    if (!std::isnan(v)) out[r.year] = v;
  }
  return out;
}

PanelDataset PanelDataset::restrict_countries(
    const std::vector<std::string>& keep) const {
  std::set<std::string> keepset(keep.begin(), keep.end());
  std::vector<PanelObservation> rows;
  for (const auto& r : rows_)
    if (keepset.count(r.country)) rows.push_back(r);
  return from_rows(std::move(rows));
}

namespace {

struct ColumnMap {
  int country = -1, year = -1;
  std::vector<std::pair<Field, int>> numeric;  // field -> csv column (-1 ok for optional)
};

ColumnMap resolve_columns(const CsvTable& csv, const KeyValueFile& schema) {
  auto mapped = [&](const std::string& canonical) {
    return schema.get_or(canonical, canonical);
  };
  ColumnMap cm;
  cm.country = csv.require_column(mapped("country"));
  cm.year = csv.require_column(mapped("year"));
  const Field required[] = {Field::MilShare,  Field::NominalGdp, Field::RealGdp,
                            Field::Deflator,  Field::Emissions,  Field::EnergyUse,
                            Field::GdpPc,     Field::Exports,    Field::Imports,
                            Field::Democracy, Field::Steel};
  for (Field f : required)
    cm.numeric.emplace_back(f, csv.require_column(mapped(field_name(f))));
  // Patents are optional columns.
  for (Field f : {Field::PatentsTotal, Field::PatentsGreen})
    cm.numeric.emplace_back(f, csv.column(mapped(field_name(f))));
  return cm;
}

void set_field(PanelObservation& obs, Field f, double v) {
  switch (f) {
    case Field::MilShare: obs.mil_share = v; break;
    case Field::NominalGdp: obs.nominal_gdp = v; break;
    case Field::RealGdp: obs.real_gdp = v; break;
    case Field::Deflator: obs.deflator = v; break;
    case Field::Emissions: obs.emissions = v; break;
    case Field::EnergyUse: obs.energy_use = v; break;
    case Field::GdpPc: obs.gdp_pc = v; break;
    case Field::Exports: obs.exports = v; break;
    case Field::Imports: obs.imports = v; break;
    case Field::Democracy: obs.democracy = v; break;
    case Field::Steel: obs.steel = v; break;
    case Field::PatentsTotal: obs.patents_total = v; break;
    case Field::PatentsGreen: obs.patents_green = v; break;
  }
}

// Value invariants; present (non-NaN) values only. Returns a reason or "".
std::string invariant_violation(const PanelObservation& o) {
  auto bad = [](double v) { return !std::isnan(v); };
  if (bad(o.mil_share) && (o.mil_share < 0.0 || o.mil_share > 1.0))
    return "mil_share outside [0, 1]";
  if (bad(o.real_gdp) && o.real_gdp <= 0.0) return "real_gdp <= 0";
  if (bad(o.deflator) && o.deflator <= 0.0) return "deflator <= 0";
  if (bad(o.emissions) && o.emissions < 0.0) return "emissions < 0";
  if (bad(o.energy_use) && o.energy_use < 0.0) return "energy_use < 0";
  return "";
}

}  // namespace

PanelDataset load_panel(const std::string& path, const KeyValueFile& schema) {
  CsvTable csv = read_csv(path);
  ColumnMap cm = resolve_columns(csv, schema);
  std::vector<PanelObservation> rows;
  std::vector<LoadDiagnostic> diags;
  for (size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& cells = csv.rows[i];
    int csv_row = static_cast<int>(i) + 2;
    PanelObservation obs;
    obs.country = cells[cm.country];
    if (obs.country.empty()) {
      std::ostringstream os;
      os << path << " row " << csv_row;
      throw DataError("empty country at " + os.str());
    }
    {
      std::ostringstream ctx;
      ctx << path << " row " << csv_row << " column year";
      double y = parse_numeric(cells[cm.year], ctx.str());
      if (std::isnan(y)) throw DataError("missing year at " + ctx.str());
      obs.year = static_cast<int>(y);
    }
    for (auto [f, col] : cm.numeric) {
      double v = std::nan("");
      if (col >= 0) {
        std::ostringstream ctx;
        ctx << path << " row " << csv_row << " column " << field_name(f);
        v = parse_numeric(cells[col], ctx.str());
      }
      set_field(obs, f, v);
    }
    std::string reason = invariant_violation(obs);
    if (!reason.empty()) {
      LoadDiagnostic d;
      d.csv_row = csv_row;
      d.country = obs.country;
      d.year = obs.year;
      d.message = reason;
      d.rejected = true;
      diags.push_back(d);
      continue;
    }
    rows.push_back(std::move(obs));
  }
  return PanelDataset::from_rows(std::move(rows), std::move(diags));
}

PanelDataset load_panel(const std::string& path) {
  return load_panel(path, KeyValueFile());
}

std::map<int, double> quadratic_trend(const std::map<int, double>& series) {
  int n = static_cast<int>(series.size());
  if (n < 4) throw DataError("quadratic_trend: fewer than 4 observations");
  double tbar = 0;
  for (const auto& [t, v] : series) tbar += t;
  tbar /= n;
  Mat X(n, 3);
  Vec y(n);
  int i = 0;
  for (const auto& [t, v] : series) {
    double tc = t - tbar;
    X(i, 0) = 1.0;
    X(i, 1) = tc;
    X(i, 2) = tc * tc;
    y(i) = v;
    ++i;
  }
  OlsFit fit = ols(y, X);
  std::map<int, double> out;
  i = 0;
  for (const auto& [t, v] : series) out[t] = fit.fitted(i++);
  return out;
}

TransformedSeries level_share(const PanelDataset& panel,
                              const std::string& country) {
  TransformedSeries out;
  out.country = country;
  out.kind = TransformKind::LevelShare;
  out.values = panel.series(country, Field::MilShare);
  return out;
}

namespace {

// m*_t: nominal military spending deflated by the GDP deflator.
std::map<int, double> real_military_spending(const PanelDataset& panel,
                                             const std::string& country) {
  std::map<int, double> out;
  auto share = panel.series(country, Field::MilShare);
  auto ngdp = panel.series(country, Field::NominalGdp);
  auto defl = panel.series(country, Field::Deflator);
  for (const auto& [t, m] : share) {
    auto gi = ngdp.find(t);
    auto di = defl.find(t);
    if (gi == ngdp.end() || di == defl.end()) continue;
    out[t] = m * gi->second / di->second;
  }
  return out;
}

}  // namespace

TransformedSeries gordon_krenn(const PanelDataset& panel,
                               const std::string& country) {
  TransformedSeries out;
  out.country = country;
  out.kind = TransformKind::GordonKrenn;
  auto mstar = real_military_spending(panel, country);
  auto rgdp = panel.series(country, Field::RealGdp);
  // Only years where both inputs exist enter the trend fit and the ratio.
  std::map<int, double> rgdp_used;
  for (const auto& [t, v] : rgdp)
    if (mstar.count(t)) rgdp_used[t] = v;
  auto trend = quadratic_trend(rgdp_used);
  for (const auto& [t, m] : mstar) {
    auto ti = trend.find(t);
    if (ti == trend.end()) continue;
    if (ti->second <= 0.0) {
      std::ostringstream os;
      os << "gordon_krenn: non-positive trend GDP for " << country << " in "
         << t;
      throw DataError(os.str());
    }
    out.values[t] = m / ti->second;
  }
  return out;
}

TransformedSeries hall_barro_redlick(const PanelDataset& panel,
                                     const std::string& country) {
  TransformedSeries out;
  out.country = country;
  out.kind = TransformKind::HallBarroRedlick;
  auto mstar = real_military_spending(panel, country);
  auto rgdp = panel.series(country, Field::RealGdp);
  if (mstar.size() < 2)
    throw DataError("hall_barro_redlick: need >= 2 consecutive years for " +
                    country);
  int prev_year = INT_MIN;
  double prev_m = 0;
  for (const auto& [t, m] : mstar) {
    if (prev_year != INT_MIN) {
      if (t != prev_year + 1) {
        std::ostringstream os;
        os << "hall_barro_redlick: non-contiguous years for " << country
           << ": " << prev_year << " -> " << t;
        throw DataError(os.str());
      }
      auto yi = rgdp.find(prev_year);
      if (yi != rgdp.end()) out.values[t] = (m - prev_m) / yi->second;
    }
    prev_year = t;
    prev_m = m;
  }
  return out;
}

}  // namespace milcarb
