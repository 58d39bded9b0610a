#include "milcarb/shocks.hpp"

#include <cmath>
#include <sstream>

#include "milcarb/csv.hpp"
#include "milcarb/errors.hpp"
#include "milcarb/ols.hpp"

namespace milcarb {

ShockSeries hamilton_shocks(const TransformedSeries& series, int h, int l) {
  if (h < 1 || l < 0) throw DataError("hamilton_shocks: need h >= 1, l >= 0");
  const auto& vals = series.values;

  // A usable window needs M at t-l..t and t+h with no year gaps in between.
  std::vector<int> origins;
  for (const auto& [t, v] : vals) {
    bool ok = true;
    for (int j = -l; j <= 0 && ok; ++j)
      if (!vals.count(t + j)) ok = false;
    if (ok && vals.count(t + h)) origins.push_back(t);
  }
  int min_obs = h + l + 1 + 10;
  if (static_cast<int>(origins.size()) + h + l < min_obs) {
    std::ostringstream os;
    os << "hamilton_shocks: too few observations for " << series.country
       << " (" << origins.size() << " usable windows; need series of >= "
       << min_obs << ")";
    throw DataError(os.str());
  }

  int nrow = static_cast<int>(origins.size());
  Mat X(nrow, l + 2);
  Vec y(nrow);
  for (int i = 0; i < nrow; ++i) {
    int t = origins[i];
    y(i) = vals.at(t + h);
    X(i, 0) = 1.0;
    for (int j = 0; j <= l; ++j) X(i, 1 + j) = vals.at(t - j);
  }
  // Residuals are unique even when the lag design is collinear (e.g. a
  // deterministic trend makes the lags affine in each other), so solve
  // lenient least squares rather than ols() with its rank check.
  Eigen::ColPivHouseholderQR<Mat> qr(X);
  Vec resid = y - X * qr.solve(y);

  ShockSeries out;
  out.country = series.country;
  out.horizon_h = h;
  out.lag_l = l;
  for (int i = 0; i < nrow; ++i)
    out.shocks[origins[i] + h] = 100.0 * resid(i);  // to p.p.
  return out;
}

ShockSeries hbr_passthrough(const TransformedSeries& series) {
  if (series.kind != TransformKind::HallBarroRedlick)
    throw DataError("hbr_passthrough: series is not HBR-transformed");
  ShockSeries out;
  out.country = series.country;
  out.horizon_h = 0;
  out.lag_l = 0;
  for (const auto& [t, v] : series.values) out.shocks[t] = 100.0 * v;
  return out;
}

std::vector<ShockSeries> extract_shocks(const PanelDataset& panel,
                                        ShockVariable var, int h, int l) {
  std::vector<ShockSeries> out;
  for (const auto& c : panel.countries()) {
    switch (var) {
      case ShockVariable::Share:
        out.push_back(hamilton_shocks(level_share(panel, c), h, l));
        break;
      case ShockVariable::GordonKrenn:
        out.push_back(hamilton_shocks(gordon_krenn(panel, c), h, l));
        break;
      case ShockVariable::HallBarroRedlick:
        out.push_back(hbr_passthrough(hall_barro_redlick(panel, c)));
        break;
    }
  }
  return out;
}

void write_shocks_csv(const std::string& path,
                      const std::vector<ShockSeries>& shocks) {
  std::ostringstream os;
  os << "country,year,shock_pp\n";
  for (const auto& s : shocks)
    for (const auto& [t, v] : s.shocks)
      os << s.country << "," << t << "," << format_double(v) << "\n";
  write_text_atomic(path, os.str());
}

std::vector<ShockSeries> read_shocks_csv(const std::string& path) {
  CsvTable csv = read_csv(path);
  int c_country = csv.require_column("country");
  int c_year = csv.require_column("year");
  int c_shock = csv.require_column("shock_pp");
  std::map<std::string, ShockSeries> by_country;
  for (size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& cells = csv.rows[i];
    std::ostringstream ctx;
    ctx << path << " row " << i + 2;
    auto& series = by_country[cells[c_country]];
    series.country = cells[c_country];
    int year = static_cast<int>(parse_numeric(cells[c_year], ctx.str()));
    series.shocks[year] = parse_numeric(cells[c_shock], ctx.str());
  }
  std::vector<ShockSeries> out;
  for (auto& [c, s] : by_country) out.push_back(std::move(s));
  return out;
}

}  // namespace milcarb
