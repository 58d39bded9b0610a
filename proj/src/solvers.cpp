#include "milcarb/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>

#include "milcarb/csv.hpp"
#include "milcarb/errors.hpp"

namespace milcarb {

namespace {

// Rows of the full residual vector kept in the square solver systems: the
// value-added price rows are exactly implied by the factor-demand rows in
// log coordinates and are dropped.
std::vector<int> solver_rows(int n) {
  ResidualLayout L{n};
  std::vector<bool> drop(residual_dim(n), false);
  for (int i = 0; i < n; ++i) drop[L.va_price(i)] = true;
  std::vector<int> keep;
  for (int r = 0; r < residual_dim(n); ++r)
    if (!drop[r]) keep.push_back(r);
  return keep;
}

Vec select_rows(const Vec& full, const std::vector<int>& rows) {
  Vec out(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) out(i) = full(rows[i]);
  return out;
}

double g_fuel_of(const Vec& g_hat, const Calibration& calib) {
  if (calib.energy_set.empty()) return 1.0;
  return g_hat(calib.energy_set.front());
}

void fill_aggregates(SteadySolution& sol, const Calibration& calib) {
  sol.emissions = emissions_hat(sol.state, g_fuel_of(sol.g_hat, calib), calib);
  sol.real_gdp = real_gdp_hat(sol.state, sol.g_hat, calib);
  sol.intensity = sol.emissions / sol.real_gdp;
}

}  // namespace

SteadySolution solve_steady(const Calibration& calib, const Vec& g_hat,
                            const SteadyOptions& opts) {
  const int n = calib.n;
  if (g_hat.size() != n || (g_hat.array() <= 0).any())
    throw DataError("solve_steady: G-hat must be positive per industry");
  const int m = hat_state_dim(n);
  const auto rows = solver_rows(n);

  HatState state = opts.initial ? *opts.initial : HatState::ones(n);
  Vec x = state.to_log_vector();

  auto full_residual = [&](const Vec& logx) {
    return steady_residuals(HatState::from_log_vector(logx, n), calib, g_hat);
  };

  SteadySolution sol;
  sol.g_hat = g_hat;
  Vec r_full = full_residual(x);
  double norm = r_full.norm();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (norm < opts.tol) break;

    // Central-difference Jacobian of the reduced residuals in log space.
    Mat J(rows.size(), m);
    Vec xp = x;
    for (int k = 0; k < m; ++k) {
      xp(k) = x(k) + opts.fd_step;
      Vec rp = select_rows(full_residual(xp), rows);
      xp(k) = x(k) - opts.fd_step;
      Vec rm = select_rows(full_residual(xp), rows);
      xp(k) = x(k);
      J.col(k) = (rp - rm) / (2.0 * opts.fd_step);
    }

    Eigen::PartialPivLU<Mat> lu(J);
    Vec step = lu.solve(-select_rows(r_full, rows));
    if (!step.allFinite()) throw SolverError("solve_steady: singular Jacobian");

    // Backtracking on the full residual norm.
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtrack; ++bt) {
      Vec x_try = x + lambda * step;
      Vec r_try = full_residual(x_try);
      double norm_try = r_try.norm();
      if (std::isfinite(norm_try) && norm_try < norm) {
        x = x_try;
        r_full = r_try;
        norm = norm_try;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    sol.iterations = iter + 1;
    if (!accepted)
      throw SolverError("solve_steady: line search failed at residual norm " +
                        format_double(norm));
  }
  if (norm >= opts.tol) {
    std::ostringstream os;
    os << "solve_steady: no convergence after " << opts.max_iter
       << " iterations (residual " << norm << ")";
    throw SolverError(os.str());
  }

  sol.state = HatState::from_log_vector(x, n);
  sol.residual_norm = norm;
  fill_aggregates(sol, calib);
  return sol;
}

namespace {

// Compact column-sparse view of a dense block: only the listed columns are
// nonzero.
struct CompactCols {
  std::vector<int> cols;
  Mat values;  // m x cols.size()
};

CompactCols compact_nonzero_cols(const Mat& M, double eps = 0.0) {
  CompactCols out;
  for (int j = 0; j < M.cols(); ++j)
    if (M.col(j).lpNorm<Eigen::Infinity>() > eps) out.cols.push_back(j);
  out.values.resize(M.rows(), out.cols.size());
  for (size_t k = 0; k < out.cols.size(); ++k)
    out.values.col(k) = M.col(out.cols[k]);
  return out;
}

struct PeriodBlocks {
  // Square per-period system: static + Euler rows from the period map, the
  // capital-accumulation rows shifted to the period whose capital they pin.
  // The last period swaps its Euler rows for the terminal capital link
  // (1-delta) K_T + delta I_T = K_terminal, which anchors investment at the
  // truncation point.
  Mat B;            // interior block
  Mat B0;           // t = 0 block (capital rows replaced by K_0 = 1)
  Mat BT;           // t = T block (Euler rows replaced by the terminal link)
  CompactCols A;    // coupling to t-1 (capital rows only)
  CompactCols C;    // coupling to t+1 (Euler rows only)
  std::vector<int> rows;        // kept rows of the full layout
  std::vector<int> capital_pos; // positions of capital rows inside `rows`
  std::vector<int> euler_pos;
};

PeriodBlocks build_blocks(const Calibration& calib, double h) {
  const int n = calib.n;
  const int m = hat_state_dim(n);
  ResidualLayout L{n};
  PeriodBlocks pb;
  pb.rows = solver_rows(n);
  for (size_t r = 0; r < pb.rows.size(); ++r)
    for (int i = 0; i < n; ++i) {
      if (pb.rows[r] == L.capital_acc(i)) pb.capital_pos.push_back(r);
      if (pb.rows[r] == L.euler(i)) pb.euler_pos.push_back(r);
    }

  const HatState ones = HatState::ones(n);
  const Vec g1 = Vec::Ones(n);
  Vec x0 = ones.to_log_vector();

  auto eval = [&](const Vec& cur_log, const Vec& next_log) {
    return dynamic_period_residuals(HatState::from_log_vector(cur_log, n),
                                    HatState::from_log_vector(next_log, n),
                                    calib, g1);
  };

  // Derivatives of the forward-convention period map f(cur, next).
  Mat Fc(pb.rows.size(), m), Fn(pb.rows.size(), m);
  Vec xp = x0;
  for (int k = 0; k < m; ++k) {
    xp(k) = x0(k) + h;
    Vec rp = select_rows(eval(xp, x0), pb.rows);
    xp(k) = x0(k) - h;
    Vec rm = select_rows(eval(xp, x0), pb.rows);
    xp(k) = x0(k);
    Fc.col(k) = (rp - rm) / (2.0 * h);

    xp(k) = x0(k) + h;
    rp = select_rows(eval(x0, xp), pb.rows);
    xp(k) = x0(k) - h;
    rm = select_rows(eval(x0, xp), pb.rows);
    xp(k) = x0(k);
    Fn.col(k) = (rp - rm) / (2.0 * h);
  }

  // Reassign: capital rows of block t read period t-1's forward equation,
  // so within a block they differentiate w.r.t. the own-period capital
  // (from Fn) and couple backward through Fc.
  const int msz = static_cast<int>(pb.rows.size());
  pb.B = Fc;
  Mat A_full = Mat::Zero(msz, m);
  Mat C_full = Fn;
  for (int rpos : pb.capital_pos) {
    pb.B.row(rpos) = Fn.row(rpos);
    A_full.row(rpos) = Fc.row(rpos);
    C_full.row(rpos).setZero();
  }
  pb.A = compact_nonzero_cols(A_full);
  pb.C = compact_nonzero_cols(C_full);

  // t = 0: capital is predetermined, K_0 given.
  pb.B0 = pb.B;
  for (size_t i = 0; i < pb.capital_pos.size(); ++i) {
    int rpos = pb.capital_pos[i];
    pb.B0.row(rpos).setZero();
    // d(K_0 - k0)/d log K_0 = K_0 = 1 at the expansion point. Capital block
    // starts at offset 4n in the state layout.
    pb.B0(rpos, 4 * n + static_cast<int>(i)) = 1.0;
  }

  // t = T: the Euler rows' slot carries the terminal capital link instead;
  // its own-period derivative is the capital row of Fc.
  pb.BT = pb.B;
  for (size_t i = 0; i < pb.euler_pos.size(); ++i)
    pb.BT.row(pb.euler_pos[i]) = Fc.row(pb.capital_pos[i]);
  return pb;
}

}  // namespace

TransitionSolution solve_transition(const Calibration& calib,
                                    const ScenarioSpec& scenario,
                                    const TransitionOptions& opts) {
  const int n = calib.n;

  PeriodBlocks pb = build_blocks(calib, opts.fd_step);
  const int msz = static_cast<int>(pb.rows.size());
  const HatState ones = HatState::ones(n);

  // Terminal anchor: the stacked system's own stationary point under the
  // long-run spending vector -- the initial steady state for rho < 1, the
  // (first-order) post-shock steady state for rho = 1. Anchoring on the
  // system's fixed point keeps the truncation check free of linearization
  // error.
  Vec u_term = Vec::Zero(msz);
  if (scenario.rho == 1.0) {
    Mat Minf = pb.B;
    for (size_t k = 0; k < pb.A.cols.size(); ++k)
      Minf.col(pb.A.cols[k]) += pb.A.values.col(k);
    for (size_t k = 0; k < pb.C.cols.size(); ++k)
      Minf.col(pb.C.cols[k]) += pb.C.values.col(k);
    Vec rinf = select_rows(
        dynamic_period_residuals(ones, ones, calib,
                                 steady_g_hat(scenario, calib)),
        pb.rows);
    for (int rpos : pb.capital_pos) rinf(rpos) = 0.0;
    u_term = Eigen::PartialPivLU<Mat>(Minf).solve(-rinf);
    if (!u_term.allFinite())
      throw SolverError("solve_transition: singular stationary system");
  }
  HatState terminal = HatState::from_log_vector(u_term, n);

  int T = opts.T;
  TransitionSolution sol;
  while (true) {
    GovernmentPath g_path = government_path(scenario, calib, T);

    // Base-point residuals per period (only the goods-clearing rows are
    // nonzero: gamma_i (G_it - 1)); the capital rows belong to the shifted
    // equation and are zero at the expansion point.
    std::vector<Vec> rhs(T + 1);
    for (int t = 0; t <= T; ++t) {
      Vec r = select_rows(
          dynamic_period_residuals(ones, ones, calib, g_path.g.col(t)),
          pb.rows);
      for (int rpos : pb.capital_pos) r(rpos) = 0.0;
      rhs[t] = -r;
    }
    // Terminal block: the capital link's K_{T+1} reference is the terminal
    // state; its own-period derivative sits in BT, the rest goes to the
    // right-hand side. (B stores the capital rows' next-period derivative.)
    for (size_t i = 0; i < pb.euler_pos.size(); ++i)
      rhs[T](pb.euler_pos[i]) = -pb.B.row(pb.capital_pos[i]).dot(u_term);

    // The only intertemporal couplings are thin: A reads last period's
    // capital and investment, C reads next period's rentals, investment
    // prices and aggregate consumption. Substitute the within-period solve
    // u_t = B^{-1} (rhs_t - A u_{t-1} - C u_{t+1}) and keep only the coupled
    // coordinates, then hand the condensed stacked system (still exactly
    // equivalent) to a globally pivoted sparse LU. One-directional block
    // elimination is unstable here: the saddle structure mixes roots on
    // both sides of one.
    const int nA = static_cast<int>(pb.A.cols.size());
    const int nC = static_cast<int>(pb.C.cols.size());
    std::vector<int> S = pb.A.cols;
    S.insert(S.end(), pb.C.cols.begin(), pb.C.cols.end());
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    const int ns = static_cast<int>(S.size());
    std::vector<int> pos_in_S(msz, -1);
    for (int k = 0; k < ns; ++k) pos_in_S[S[k]] = k;

    Eigen::PartialPivLU<Mat> luB(pb.B);
    Eigen::PartialPivLU<Mat> luB0(pb.B0);
    Eigen::PartialPivLU<Mat> luBT(pb.BT);
    Mat BiA = luB.solve(pb.A.values);    // msz x nA
    Mat BiC = luB.solve(pb.C.values);    // msz x nC
    Mat B0iC = luB0.solve(pb.C.values);
    Mat BTiA = luBT.solve(pb.A.values);
    if (!BiA.allFinite() || !BiC.allFinite() || !B0iC.allFinite() ||
        !BTiA.allFinite())
      throw SolverError("solve_transition: singular period block");

    auto restrict_rows = [&](const Mat& M) {
      Mat out(ns, M.cols());
      for (int k = 0; k < ns; ++k) out.row(k) = M.row(S[k]);
      return out;
    };
    Mat Gp = restrict_rows(BiA);    // couples to y_{t-1}
    Mat Gn = restrict_rows(BiC);    // couples to y_{t+1}
    Mat Gn0 = restrict_rows(B0iC);
    Mat GpT = restrict_rows(BTiA);

    auto lu_at = [&](int t) -> Eigen::PartialPivLU<Mat>& {
      return t == 0 ? luB0 : (t == T ? luBT : luB);
    };
    std::vector<Vec> bi_rhs(T + 1);
    for (int t = 0; t <= T; ++t) bi_rhs[t] = lu_at(t).solve(rhs[t]);

    // Condensed system: y_t + Gp y_{t-1}|A + Gn y_{t+1}|C = g_t.
    Eigen::SparseMatrix<double> M(ns * (T + 1), ns * (T + 1));
    {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(static_cast<size_t>(T + 1) * ns * (nA + nC + 1));
      for (int t = 0; t <= T; ++t) {
        for (int k = 0; k < ns; ++k) trip.emplace_back(t * ns + k, t * ns + k, 1.0);
        if (t > 0) {
          const Mat& G = (t == T) ? GpT : Gp;
          for (int a = 0; a < nA; ++a) {
            int col = (t - 1) * ns + pos_in_S[pb.A.cols[a]];
            for (int k = 0; k < ns; ++k)
              if (G(k, a) != 0.0) trip.emplace_back(t * ns + k, col, G(k, a));
          }
        }
        if (t < T) {
          const Mat& G = (t == 0) ? Gn0 : Gn;
          for (int c = 0; c < nC; ++c) {
            int col = (t + 1) * ns + pos_in_S[pb.C.cols[c]];
            for (int k = 0; k < ns; ++k)
              if (G(k, c) != 0.0) trip.emplace_back(t * ns + k, col, G(k, c));
          }
        }
      }
      M.setFromTriplets(trip.begin(), trip.end());
    }
    Vec grhs(ns * (T + 1));
    for (int t = 0; t <= T; ++t)
      for (int k = 0; k < ns; ++k) grhs(t * ns + k) = bi_rhs[t](S[k]);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> slu;
    slu.compute(M);
    if (slu.info() != Eigen::Success)
      throw SolverError("solve_transition: singular stacked system");
    Vec y = slu.solve(grhs);
    if (!y.allFinite())
      throw SolverError("solve_transition: singular stacked system");

    // Recover the full state per period from the coupled coordinates.
    std::vector<Vec> us(T + 1);
    for (int t = 0; t <= T; ++t) {
      Vec r = rhs[t];
      if (t > 0)
        for (int a = 0; a < nA; ++a)
          r -= pb.A.values.col(a) * y((t - 1) * ns + pos_in_S[pb.A.cols[a]]);
      if (t < T)
        for (int c = 0; c < nC; ++c)
          r -= pb.C.values.col(c) * y((t + 1) * ns + pos_in_S[pb.C.cols[c]]);
      us[t] = lu_at(t).solve(r);
    }

    sol.path.clear();
    sol.path.reserve(T + 1);
    for (int t = 0; t <= T; ++t)
      sol.path.push_back(HatState::from_log_vector(us[t], n));
    sol.g_path = g_path;
    sol.terminal = terminal;
    sol.T = T;

    // Stacked-system residual, for diagnostics.
    double lin_res = 0.0;
    for (int t = 0; t <= T; ++t) {
      Vec lhs = (t == 0 ? pb.B0 : (t == T ? pb.BT : pb.B)) * us[t];
      if (t > 0)
        for (int k = 0; k < nA; ++k)
          lhs += pb.A.values.col(k) * us[t - 1](pb.A.cols[k]);
      if (t < T)
        for (int k = 0; k < nC; ++k)
          lhs += pb.C.values.col(k) * us[t + 1](pb.C.cols[k]);
      lin_res = std::max(lin_res, (lhs - rhs[t]).lpNorm<Eigen::Infinity>());
    }
    sol.linear_residual = lin_res;

    sol.terminal_gap = (us[T] - u_term).lpNorm<Eigen::Infinity>();
    if (sol.terminal_gap <= opts.terminal_tol) break;
    if (2 * T > opts.max_T) {
      std::ostringstream os;
      os << "solve_transition: terminal gap " << sol.terminal_gap
         << " above tolerance at T = " << T << "; raise T";
      throw SolverError(os.str());
    }
    T *= 2;
  }

  // Per-period aggregates.
  sol.emissions.resize(sol.T + 1);
  sol.real_gdp.resize(sol.T + 1);
  sol.intensity.resize(sol.T + 1);
  for (int t = 0; t <= sol.T; ++t) {
    double g_fuel = g_fuel_of(sol.g_path.g.col(t), calib);
    sol.emissions(t) = emissions_hat(sol.path[t], g_fuel, calib);
    sol.real_gdp(t) = real_gdp_hat(sol.path[t], sol.g_path.g.col(t), calib);
    sol.intensity(t) = sol.emissions(t) / sol.real_gdp(t);
  }
  return sol;
}

ShockDecomposition decompose_shocks(const Calibration& calib,
                                    const ScenarioSpec& scenario) {
  auto mult = scenario_multipliers(scenario, calib);
  Vec g_weapon = Vec::Ones(calib.n), g_energy = Vec::Ones(calib.n);
  for (int i : calib.weapon_set) g_weapon(i) = mult.PM;
  for (int i : calib.energy_set) g_energy(i) = mult.EM;

  ShockDecomposition d;
  d.weapon_only = solve_steady(calib, g_weapon);
  d.energy_only = solve_steady(calib, g_energy);
  d.joint = solve_steady(calib, steady_g_hat(scenario, calib));
  double sum = (d.weapon_only.emissions - 1.0) + (d.energy_only.emissions - 1.0);
  d.nonlinearity_gap = sum - (d.joint.emissions - 1.0);
  return d;
}

namespace {

void sort_and_flag(std::vector<IndustryChange>& rows,
                   const Calibration& calib) {
  for (int i : calib.weapon_set) rows[i].weapon = true;
  for (int i : calib.energy_set) rows[i].energy = true;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const IndustryChange& a, const IndustryChange& b) {
                     return a.output_change > b.output_change;
                   });
}

}  // namespace

std::vector<IndustryChange> industry_report(const SteadySolution& sol,
                                            const Calibration& calib) {
  std::vector<IndustryChange> rows(calib.n);
  for (int i = 0; i < calib.n; ++i) {
    rows[i].label = calib.labels[i];
    rows[i].output_change = sol.state.output(i) - 1.0;
    rows[i].capital_change = sol.state.capital(i) - 1.0;
  }
  sort_and_flag(rows, calib);
  return rows;
}

std::vector<IndustryChange> industry_report(const TransitionSolution& sol,
                                            const Calibration& calib) {
  std::vector<IndustryChange> rows(calib.n);
  for (int i = 0; i < calib.n; ++i) {
    rows[i].label = calib.labels[i];
    for (int t = 0; t <= sol.T; ++t) {
      double dy = sol.path[t].output(i) - 1.0;
      if (std::abs(dy) > std::abs(rows[i].output_change)) {
        rows[i].output_change = dy;
        rows[i].output_peak_t = t;
      }
      // Stock chosen at t (used in t+1): report with the t dating.
      if (t + 1 <= sol.T) {
        double dk = sol.path[t + 1].capital(i) - 1.0;
        if (std::abs(dk) > std::abs(rows[i].capital_change)) {
          rows[i].capital_change = dk;
          rows[i].capital_peak_t = t;
        }
      }
    }
  }
  sort_and_flag(rows, calib);
  return rows;
}

std::vector<SweepRow> sweep_steady(const Calibration& calib,
                                   const std::vector<std::string>& presets,
                                   double e_from, double e_to, double e_step) {
  if (e_step <= 0 || e_to < e_from) throw ConfigError("sweep: bad grid");
  std::vector<SweepRow> rows;
  for (const auto& preset : presets) {
    HatState warm = HatState::ones(calib.n);
    for (double e = e_from; e <= e_to + 1e-12; e += e_step) {
      ScenarioSpec sc = scenario_preset(preset, e);
      SteadyOptions opts;
      opts.initial = &warm;
      auto sol = solve_steady(calib, steady_g_hat(sc, calib), opts);
      warm = sol.state;
      SweepRow row;
      row.preset = preset;
      row.E_pp = e;
      row.emissions_pct = 100.0 * (sol.emissions - 1.0);
      row.intensity_pct = 100.0 * (sol.intensity - 1.0);
      row.real_gdp_pct = 100.0 * (sol.real_gdp - 1.0);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "preset,E_pp,emissions_pct,intensity_pct,real_gdp_pct\n";
  for (const auto& r : rows)
    os << r.preset << "," << format_double(r.E_pp) << ","
       << format_double(r.emissions_pct) << ","
       << format_double(r.intensity_pct) << ","
       << format_double(r.real_gdp_pct) << "\n";
  write_text_atomic(path, os.str());
}

void write_transition_csv(const std::string& path,
                          const TransitionSolution& sol,
                          const Calibration& calib) {
  std::ostringstream os;
  os << "t,emissions_hat,real_gdp_hat,intensity_hat";
  for (int i = 0; i < calib.n; ++i) os << ",y_" << i + 1;
  for (int i = 0; i < calib.n; ++i) os << ",k_next_" << i + 1;
  os << "\n";
  for (int t = 0; t <= sol.T; ++t) {
    os << t << "," << format_double(sol.emissions(t)) << ","
       << format_double(sol.real_gdp(t)) << ","
       << format_double(sol.intensity(t));
    for (int i = 0; i < calib.n; ++i)
      os << "," << format_double(sol.path[t].output(i));
    // Capital dated as the stock chosen at t (used in t+1).
    for (int i = 0; i < calib.n; ++i) {
      double k = t + 1 <= sol.T ? sol.path[t + 1].capital(i)
                                : sol.terminal.capital(i);
      os << "," << format_double(k);
    }
    os << "\n";
  }
  write_text_atomic(path, os.str());
}

}  // namespace milcarb
