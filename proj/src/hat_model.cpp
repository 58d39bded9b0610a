#include "milcarb/hat_model.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "milcarb/errors.hpp"

namespace milcarb {

HatState HatState::ones(int n) {
  HatState s;
  s.price = Vec::Ones(n);
  s.output = Vec::Ones(n);
  s.value_added = Vec::Ones(n);
  s.intermediates = Vec::Ones(n);
  s.capital = Vec::Ones(n);
  s.labor = Vec::Ones(n);
  s.rental = Vec::Ones(n);
  s.inv_price = Vec::Ones(n);
  s.investment = Vec::Ones(n);
  s.consumption = Vec::Ones(n);
  s.va_price = Vec::Ones(n);
  s.x_price = Vec::Ones(n);
  s.agg_consumption = 1.0;
  s.agg_labor = 1.0;
  s.wage = 1.0;
  return s;
}

bool HatState::strictly_positive() const {
  auto pos = [](const Vec& v) { return (v.array() > 0).all(); };
  return pos(price) && pos(output) && pos(value_added) && pos(intermediates) &&
         pos(capital) && pos(labor) && pos(rental) && pos(inv_price) &&
         pos(investment) && pos(consumption) && pos(va_price) && pos(x_price) &&
         agg_consumption > 0 && agg_labor > 0 && wage > 0;
}

Vec HatState::to_log_vector() const {
  const int n = industries();
  Vec v(hat_state_dim(n));
  const Vec* blocks[] = {&price,     &output,     &value_added, &intermediates,
                         &capital,   &labor,      &rental,      &inv_price,
                         &investment, &consumption, &va_price,   &x_price};
  int off = 0;
  for (const Vec* b : blocks) {
    v.segment(off, n) = b->array().log().matrix();
    off += n;
  }
  v(off++) = std::log(agg_consumption);
  v(off++) = std::log(agg_labor);
  v(off++) = std::log(wage);
  return v;
}

HatState HatState::from_log_vector(const Vec& v, int n) {
  HatState s;
  Vec* blocks[] = {&s.price,      &s.output,      &s.value_added,
                   &s.intermediates, &s.capital,  &s.labor,
                   &s.rental,     &s.inv_price,   &s.investment,
                   &s.consumption, &s.va_price,   &s.x_price};
  int off = 0;
  for (Vec* b : blocks) {
    *b = v.segment(off, n).array().exp().matrix();
    off += n;
  }
  s.agg_consumption = std::exp(v(off++));
  s.agg_labor = std::exp(v(off++));
  s.wage = std::exp(v(off++));
  return s;
}

std::string HatState::to_json() const {
  nlohmann::json j;
  auto vec = [](const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["price"] = vec(price);
  j["output"] = vec(output);
  j["value_added"] = vec(value_added);
  j["intermediates"] = vec(intermediates);
  j["capital"] = vec(capital);
  j["labor"] = vec(labor);
  j["rental"] = vec(rental);
  j["inv_price"] = vec(inv_price);
  j["investment"] = vec(investment);
  j["consumption"] = vec(consumption);
  j["va_price"] = vec(va_price);
  j["x_price"] = vec(x_price);
  j["agg_consumption"] = agg_consumption;
  j["agg_labor"] = agg_labor;
  j["wage"] = wage;
  return j.dump(2);
}

namespace {

void check_state(const HatState& s, const Calibration& calib) {
  if (s.industries() != calib.n)
    throw DataError("hat state dimension does not match calibration");
  if (!s.strictly_positive())
    throw DataError("hat state has non-positive entries");
}

// Static rows shared by the steady and dynamic systems.
void fill_static_rows(Vec& r, const ResidualLayout& L, const HatState& s,
                      const Calibration& c, const Vec& g) {
  const int n = c.n;
  Vec log_p = s.price.array().log().matrix();

  for (int i = 0; i < n; ++i)
    r(L.household(i)) = s.agg_consumption / s.price(i) - s.consumption(i);

  r(L.numeraire()) = std::exp(c.beta_cons.dot(log_p)) - 1.0;
  r(L.labor_supply()) =
      std::pow(s.wage / s.agg_consumption, c.frisch) - s.agg_labor;

  for (int i = 0; i < n; ++i) {
    // Price indices are Cobb-Douglas aggregates of goods prices.
    r(L.inv_price(i)) = std::exp(c.chi.col(i).dot(log_p)) - s.inv_price(i);
    r(L.x_price(i)) = std::exp(c.omega.col(i).dot(log_p)) - s.x_price(i);

    r(L.production(i)) = std::pow(s.value_added(i), c.theta(i)) *
                             std::pow(s.intermediates(i), 1.0 - c.theta(i)) -
                         s.output(i);
    r(L.va_tech(i)) = std::pow(s.capital(i), 1.0 - c.alpha(i)) *
                          std::pow(s.labor(i), c.alpha(i)) -
                      s.value_added(i);
    r(L.va_demand(i)) =
        s.price(i) * s.output(i) / s.va_price(i) - s.value_added(i);
    r(L.va_price(i)) = std::pow(s.rental(i), 1.0 - c.alpha(i)) *
                           std::pow(s.wage, c.alpha(i)) -
                       s.va_price(i);
    r(L.capital_demand(i)) =
        s.va_price(i) * s.value_added(i) / s.rental(i) - s.capital(i);
    r(L.labor_demand(i)) =
        s.va_price(i) * s.value_added(i) / s.wage - s.labor(i);
    r(L.x_demand(i)) =
        s.price(i) * s.output(i) / s.x_price(i) - s.intermediates(i);
  }

  // Goods clearing with the pairwise demands substituted in:
  // x_ij = P_X_j X_j / p_i and i_ij = pI_j I_j / p_i.
  for (int i = 0; i < n; ++i) {
    double demand = c.phi(i) * s.consumption(i) + c.gamma(i) * g(i);
    for (int j = 0; j < n; ++j) {
      demand += c.Delta(i, j) * s.x_price(j) * s.intermediates(j) / s.price(i);
      demand += c.iota(i, j) * s.inv_price(j) * s.investment(j) / s.price(i);
    }
    r(L.goods_clearing(i)) = demand - s.output(i);
  }

  r(L.labor_clearing()) = c.lambda.dot(s.labor) - s.agg_labor;
}

}  // namespace

Vec steady_residuals(const HatState& state, const Calibration& calib,
                     const Vec& g_hat) {
  check_state(state, calib);
  const int n = calib.n;
  ResidualLayout L{n};
  Vec r(residual_dim(n));
  fill_static_rows(r, L, state, calib, g_hat);
  for (int i = 0; i < n; ++i) {
    double bd = calib.beta_disc * (1.0 - calib.delta_dep(i));
    // Steady Euler: pI = (1 - beta(1-delta)) r + beta(1-delta) pI.
    r(L.euler(i)) =
        (1.0 - bd) * state.rental(i) + bd * state.inv_price(i) -
        state.inv_price(i);
    // Steady capital accumulation: I = K.
    r(L.capital_acc(i)) = state.investment(i) - state.capital(i);
  }
  return r;
}

Vec dynamic_period_residuals(const HatState& cur, const HatState& next,
                             const Calibration& calib, const Vec& g_col) {
  check_state(cur, calib);
  check_state(next, calib);
  const int n = calib.n;
  ResidualLayout L{n};
  Vec r(residual_dim(n));
  fill_static_rows(r, L, cur, calib, g_col);
  for (int i = 0; i < n; ++i) {
    double bd = calib.beta_disc * (1.0 - calib.delta_dep(i));
    r(L.euler(i)) =
        ((1.0 - bd) * next.rental(i) + bd * next.inv_price(i)) /
            next.agg_consumption -
        cur.inv_price(i) / cur.agg_consumption;
    r(L.capital_acc(i)) = (1.0 - calib.delta_dep(i)) * cur.capital(i) +
                          calib.delta_dep(i) * cur.investment(i) -
                          next.capital(i);
  }
  return r;
}

Vec dynamic_residuals(const std::vector<HatState>& path, const Vec& k0,
                      const HatState& terminal, const Calibration& calib,
                      const GovernmentPath& g_path) {
  const int n = calib.n;
  const int T1 = static_cast<int>(path.size());
  if (T1 < 2) throw DataError("dynamic_residuals: path length must be >= 2");
  if (g_path.g.rows() != n || g_path.periods() < T1)
    throw DataError("dynamic_residuals: government path too short");
  if (k0.size() != n) throw DataError("dynamic_residuals: bad k0");

  Vec r(n + T1 * residual_dim(n));
  r.head(n) = path[0].capital - k0;  // capital is predetermined
  for (int t = 0; t < T1; ++t) {
    const HatState& next = (t + 1 < T1) ? path[t + 1] : terminal;
    r.segment(n + t * residual_dim(n), residual_dim(n)) =
        dynamic_period_residuals(path[t], next, calib, g_path.g.col(t));
  }
  return r;
}

double emissions_hat(const HatState& state, double g_fuel_hat,
                     const Calibration& calib) {
  double share_sum = calib.eps_ind.sum() + calib.eps_hh + calib.eps_govt;
  if (std::abs(share_sum - 1.0) > 1e-8)
    throw DataError("emissions_hat: emission shares do not sum to 1");
  return calib.eps_ind.dot(state.output) +
         calib.eps_hh * state.agg_consumption + calib.eps_govt * g_fuel_hat;
}

double real_gdp_hat(const HatState& state, const Vec& g_hat,
                    const Calibration& calib) {
  const int n = calib.n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = calib.output_weight(i);
    double inv_q = 0.0, inv_base = 0.0;
    for (int j = 0; j < n; ++j) {
      // Investment deliveries i -> j at base prices.
      inv_q += calib.iota(i, j) * state.inv_price(j) * state.investment(j) /
               state.price(i);
      inv_base += calib.iota(i, j);
    }
    num += w * (calib.phi(i) * state.consumption(i) +
                calib.gamma(i) * g_hat(i) + inv_q);
    den += w * (calib.phi(i) + calib.gamma(i) + inv_base);
  }
  if (den <= 0.0) throw DataError("real_gdp_hat: no final uses");
  return num / den;
}

}  // namespace milcarb
