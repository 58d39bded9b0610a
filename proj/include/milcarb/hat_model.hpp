#pragma once

#include <string>
#include <vector>

#include "milcarb/calibration.hpp"
#include "milcarb/types.hpp"

namespace milcarb {

// Counterfactual-to-baseline ratios of every endogenous variable. Pairwise
// flows (intermediate purchases and investment deliveries) are eliminated
// analytically through their Cobb-Douglas demands, so the state is O(n).
// All entries are strictly positive; the consumption price index is the
// numeraire.
struct HatState {
  Vec price;         // goods prices
  Vec output;        // gross output
  Vec value_added;   // value-added bundles
  Vec intermediates; // intermediate input bundles
  Vec capital;       // capital in use
  Vec labor;         // industry labor
  Vec rental;        // capital rental rates
  Vec inv_price;     // investment bundle prices
  Vec investment;    // investment bundles
  Vec consumption;   // household purchases per good
  Vec va_price;      // value-added bundle prices
  Vec x_price;       // intermediate bundle prices
  double agg_consumption = 1.0;
  double agg_labor = 1.0;
  double wage = 1.0;

  static HatState ones(int n);
  int industries() const { return static_cast<int>(price.size()); }
  bool strictly_positive() const;
  // Flattened log coordinates, fixed block order:
  // [price, output, value_added, intermediates, capital, labor, rental,
  //  inv_price, investment, consumption, va_price, x_price, C, L, w].
  Vec to_log_vector() const;
  static HatState from_log_vector(const Vec& v, int n);
  std::string to_json() const;
};

// Number of state coordinates / residual rows for n industries.
inline int hat_state_dim(int n) { return 12 * n + 3; }
inline int residual_dim(int n) { return 13 * n + 3; }

// Residual block layout (one period, n industries):
//   [0, n)              household demand per good
//   [n]                 numeraire (price index = 1)
//   [n+1]               labor supply
//   [n+2, 2n+2)         investment price index
//   [2n+2, 3n+2)        Euler equation
//   [3n+2, 4n+2)        capital accumulation
//   [4n+2, 5n+2)        production function
//   [5n+2, 6n+2)        value-added technology
//   [6n+2, 7n+2)        value-added demand
//   [7n+2, 8n+2)        value-added price index (implied; dropped in solvers)
//   [8n+2, 9n+2)        capital demand
//   [9n+2, 10n+2)       labor demand
//   [10n+2, 11n+2)      intermediate bundle demand
//   [11n+2, 12n+2)      intermediate price index
//   [12n+2, 13n+2)      goods market clearing (demand minus supply)
//   [13n+2]             labor market clearing
struct ResidualLayout {
  int n;
  int household(int i) const { return i; }
  int numeraire() const { return n; }
  int labor_supply() const { return n + 1; }
  int inv_price(int i) const { return n + 2 + i; }
  int euler(int i) const { return 2 * n + 2 + i; }
  int capital_acc(int i) const { return 3 * n + 2 + i; }
  int production(int i) const { return 4 * n + 2 + i; }
  int va_tech(int i) const { return 5 * n + 2 + i; }
  int va_demand(int i) const { return 6 * n + 2 + i; }
  int va_price(int i) const { return 7 * n + 2 + i; }
  int capital_demand(int i) const { return 8 * n + 2 + i; }
  int labor_demand(int i) const { return 9 * n + 2 + i; }
  int x_demand(int i) const { return 10 * n + 2 + i; }
  int x_price(int i) const { return 11 * n + 2 + i; }
  int goods_clearing(int i) const { return 12 * n + 2 + i; }
  int labor_clearing() const { return 13 * n + 2; }
};

// Government spending ratios per industry and period; 1 for non-shocked
// industries.
struct GovernmentPath {
  Mat g;  // (industry, period)
  int periods() const { return static_cast<int>(g.cols()); }
};

// Steady-state residuals at a candidate state. The intertemporal equations
// collapse to their steady forms (investment price ties to the rental rate;
// investment equals capital). Zero iff the state is an equilibrium.
Vec steady_residuals(const HatState& state, const Calibration& calib,
                     const Vec& g_hat);

// One period of the dynamic system in the forward convention: the Euler
// rows reference next-period prices and consumption, and the capital rows
// state K_{t+1} = (1 - delta) K_t + delta I_t with K_{t+1} read from `next`.
// For t = T pass the terminal state as `next`.
Vec dynamic_period_residuals(const HatState& cur, const HatState& next,
                             const Calibration& calib, const Vec& g_col);

// Full stacked residual over a path: an initial block K_0 - (given) followed
// by (T+1) period blocks; the capital-accumulation rows of block t couple
// K_{t+1} (from the next state, or the terminal state at t = T) to this
// period's capital and investment.
Vec dynamic_residuals(const std::vector<HatState>& path, const Vec& k0,
                      const HatState& terminal, const Calibration& calib,
                      const GovernmentPath& g_path);

// Total emissions ratio: sum of industry output ratios weighted by scope-1
// emission shares plus household and government terms.
double emissions_hat(const HatState& state, double g_fuel_hat,
                     const Calibration& calib);

// Laspeyres real GDP ratio: base-price-weighted final uses (consumption,
// government, investment deliveries).
double real_gdp_hat(const HatState& state, const Vec& g_hat,
                    const Calibration& calib);

}  // namespace milcarb
