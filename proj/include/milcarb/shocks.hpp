#pragma once

#include <map>
#include <string>
#include <vector>

#include "milcarb/panel.hpp"

namespace milcarb {

// Military spending shocks in percentage points of GDP, dated at the
// realization date t+h so they align with outcome dates in the local
// projections.
struct ShockSeries {
  std::string country;
  std::map<int, double> shocks;  // year -> shock, percentage points
  int horizon_h = 2;
  int lag_l = 2;
};

// Hamilton-filter forecast errors: regress M_{t+h} on {1, M_t, ..., M_{t-l}}
// and keep the residuals, per country. The regression always includes an
// intercept. Input series are fractions; output is scaled x100 into
// percentage points. Lag windows never span year gaps. Requires at least
// h + l + 1 + 10 usable observations.
ShockSeries hamilton_shocks(const TransformedSeries& series, int h = 2,
                            int l = 2);

// Hall-Barro-Redlick spending changes are used directly as shocks (no
// filtering), scaled x100 into percentage points.
ShockSeries hbr_passthrough(const TransformedSeries& series);

enum class ShockVariable { Share, GordonKrenn, HallBarroRedlick };

// Per-country shock extraction over a whole panel.
std::vector<ShockSeries> extract_shocks(const PanelDataset& panel,
                                        ShockVariable var, int h = 2,
                                        int l = 2);

void write_shocks_csv(const std::string& path,
                      const std::vector<ShockSeries>& shocks);
std::vector<ShockSeries> read_shocks_csv(const std::string& path);

}  // namespace milcarb
