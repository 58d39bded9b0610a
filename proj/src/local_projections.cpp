#include "milcarb/local_projections.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "milcarb/csv.hpp"
#include "milcarb/errors.hpp"
#include "milcarb/ols.hpp"

namespace milcarb {

std::vector<ControlSpec> default_lp_controls() {
  using K = ControlSpec::Kind;
  return {
      {Field::GdpPc, K::LogDiff, 1},   {Field::GdpPc, K::LogDiff, 2},
      {Field::Exports, K::LogDiff, 1}, {Field::Imports, K::LogDiff, 1},
      {Field::Democracy, K::Level, 1},
  };
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Pre-assembled per-(country, year) regression ingredients. The per-horizon
// samples are carved out of this.
struct PanelCell {
  int country_id;
  int year;
  double shock;      // p.p.
  Vec controls;      // X_{i,t-1}
  Vec dlags;         // lags of the outcome first difference
  int group = 0;     // 0 unless a split is requested (then 0 = HIGH, 1 = LOW)
};

struct PreparedPanel {
  std::vector<std::string> countries;                  // id -> name
  std::vector<std::map<int, double>> outcome;          // transformed, per id
  std::vector<PanelCell> cells;
  long log_zero_drops = 0;
};

double lookup(const std::map<int, double>& m, int year) {
  auto it = m.find(year);
  return it == m.end() ? kNaN : it->second;
}

PreparedPanel prepare_panel(const PanelDataset& panel,
                            const std::map<std::string, std::map<int, double>>&
                                shocks_by_country,
                            const OutcomeSpec& outcome, const LpSpec& spec,
                            const GroupClassification* groups) {
  PreparedPanel prep;
  for (const auto& c : panel.countries()) {
    if (!shocks_by_country.count(c)) continue;  // contributes no rows
    if (groups && !groups->group.count(c)) continue;  // not classified
    prep.countries.push_back(c);
  }

  // Transformed outcome series o_t; log outcomes are x100 so long
  // differences read as percent.
  for (const auto& c : prep.countries) {
    std::map<int, double> o;
    for (const auto& [t, v] : panel.series(c, outcome.field)) {
      if (outcome.log) {
        if (v <= 0.0) {
          ++prep.log_zero_drops;
          continue;
        }
        o[t] = 100.0 * std::log(v);
      } else {
        o[t] = outcome.scale * v;
      }
    }
    prep.outcome.push_back(std::move(o));
  }

  // Control series per country, already lagged/differenced per spec.
  int kc = static_cast<int>(spec.controls.size());
  for (size_t ci = 0; ci < prep.countries.size(); ++ci) {
    const auto& c = prep.countries[ci];
    std::vector<std::map<int, double>> control_series;
    for (const auto& ctl : spec.controls)
      control_series.push_back(panel.series(c, ctl.field));

    auto shock_it = shocks_by_country.find(c);
    if (shock_it == shocks_by_country.end()) continue;
    const auto& o = prep.outcome[ci];

    for (const auto& [t, shock] : shock_it->second) {
      PanelCell cell;
      cell.country_id = static_cast<int>(ci);
      cell.year = t;
      cell.shock = shock;
      cell.controls.resize(kc);
      bool ok = true;
      for (int k = 0; k < kc && ok; ++k) {
        const auto& ctl = spec.controls[k];
        const auto& s = control_series[k];
        if (ctl.kind == ControlSpec::Kind::LogDiff) {
          double a = lookup(s, t - ctl.lag), b = lookup(s, t - ctl.lag - 1);
          if (std::isnan(a) || std::isnan(b) || a <= 0.0 || b <= 0.0)
            ok = false;
          else
            cell.controls(k) = std::log(a) - std::log(b);
        } else {
          double a = lookup(s, t - ctl.lag);
          if (std::isnan(a)) ok = false;
          else cell.controls(k) = a;
        }
      }
      cell.dlags.resize(spec.lags_l);
      for (int j = 1; j <= spec.lags_l && ok; ++j) {
        double a = lookup(o, t - j), b = lookup(o, t - j - 1);
        if (std::isnan(a) || std::isnan(b)) ok = false;
        else cell.dlags(j - 1) = a - b;
      }
      if (!ok) continue;
      if (groups) {
        auto g = groups->group.at(c);
        cell.group = (g == IntensityGroup::High) ? 0 : 1;
      }
      prep.cells.push_back(std::move(cell));
    }
  }
  return prep;
}

// Design with explicit country / year dummy blocks kept out of the dense
// part so X'X can be assembled by group sums instead of a full syrk.
struct FeDesign {
  Mat dense;
  Vec y;
  std::vector<int> country;  // -1 when country FE disabled
  std::vector<int> yearcat;  // -1 for the omitted reference column
  int n_country = 0;
  int n_yearcat = 0;
  std::vector<int> time;
  std::vector<std::string> dense_labels;
};

struct FeFit {
  Vec coef;          // dense block coefficients only
  Vec dense_se;      // Driscoll-Kraay, per dense column
  int n = 0;
};

FeFit solve_fe(const FeDesign& d, int dk_lags) {
  const int N = static_cast<int>(d.y.size());
  const int k = static_cast<int>(d.dense.cols());
  const int p = k + d.n_country + d.n_yearcat;
  if (N == 0) throw DataError("empty estimation sample");
  if (N <= p) {
    std::ostringstream os;
    os << "estimation sample too small (" << N << " rows, " << p
       << " regressors)";
    throw DataError(os.str());
  }

  // X'X and X'y assembled blockwise: dense x dense by syrk, dummy blocks by
  // group counts and sums.
  Mat xtx = Mat::Zero(p, p);
  Vec xty = Vec::Zero(p);
  xtx.topLeftCorner(k, k) = d.dense.transpose() * d.dense;
  xty.head(k) = d.dense.transpose() * d.y;

  Mat csum = Mat::Zero(d.n_country, k);
  Mat ysum = Mat::Zero(d.n_yearcat, k);
  Vec ccnt = Vec::Zero(d.n_country), ycnt = Vec::Zero(d.n_yearcat);
  Vec cy = Vec::Zero(d.n_country), yy = Vec::Zero(d.n_yearcat);
  Mat cross = Mat::Zero(d.n_country, d.n_yearcat);
  for (int r = 0; r < N; ++r) {
    int c = d.country.empty() ? -1 : d.country[r];
    int t = d.yearcat.empty() ? -1 : d.yearcat[r];
    if (c >= 0) {
      csum.row(c) += d.dense.row(r);
      ccnt(c) += 1;
      cy(c) += d.y(r);
    }
    if (t >= 0) {
      ysum.row(t) += d.dense.row(r);
      ycnt(t) += 1;
      yy(t) += d.y(r);
    }
    if (c >= 0 && t >= 0) cross(c, t) += 1;
  }
  if (d.n_country > 0) {
    xtx.block(k, 0, d.n_country, k) = csum;
    xtx.block(0, k, k, d.n_country) = csum.transpose();
    xtx.block(k, k, d.n_country, d.n_country) = ccnt.asDiagonal();
    xty.segment(k, d.n_country) = cy;
  }
  if (d.n_yearcat > 0) {
    int off = k + d.n_country;
    xtx.block(off, 0, d.n_yearcat, k) = ysum;
    xtx.block(0, off, k, d.n_yearcat) = ysum.transpose();
    xtx.block(off, off, d.n_yearcat, d.n_yearcat) = ycnt.asDiagonal();
    xty.segment(off, d.n_yearcat) = yy;
    if (d.n_country > 0) {
      xtx.block(k, off, d.n_country, d.n_yearcat) = cross;
      xtx.block(off, k, d.n_yearcat, d.n_country) = cross.transpose();
    }
  }

  Eigen::ColPivHouseholderQR<Mat> qr(xtx);
  qr.setThreshold(1e-11);
  if (qr.rank() < p) {
    std::ostringstream os;
    os << "collinear design after FE absorption (rank " << qr.rank() << " of "
       << p << ")";
    throw DataError(os.str());
  }
  Vec b = qr.solve(xty);

  // Residuals row by row; dummies contribute their coefficient directly.
  Vec resid(N);
  for (int r = 0; r < N; ++r) {
    double fit = d.dense.row(r).dot(b.head(k));
    int c = d.country.empty() ? -1 : d.country[r];
    int t = d.yearcat.empty() ? -1 : d.yearcat[r];
    if (c >= 0) fit += b(k + c);
    if (t >= 0) fit += b(k + d.n_country + t);
    resid(r) = d.y(r) - fit;
  }

  // Distinct times, positional lag structure.
  std::vector<int> times = d.time;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  int T = static_cast<int>(times.size());
  if (dk_lags >= T)
    throw DataError("Driscoll-Kraay: fewer time periods than lags + 1");
  std::map<int, int> time_pos;
  for (int i = 0; i < T; ++i) time_pos[times[i]] = i;

  // DK variance of dense coefficient j: v = (X'X)^{-1} e_j, score
  // q_t = sum_{rows at t} (x_row . v) u_row, then the Bartlett-weighted
  // quadratic form in q. Algebraically (X'X)^{-1} S (X'X)^{-1} restricted to
  // one coordinate, without materializing S.
  FeFit fit;
  fit.coef = b.head(k);
  fit.dense_se.resize(k);
  fit.n = N;
  for (int j = 0; j < k; ++j) {
    Vec ej = Vec::Zero(p);
    ej(j) = 1.0;
    Vec v = qr.solve(ej);
    Vec q = Vec::Zero(T);
    for (int r = 0; r < N; ++r) {
      double xv = d.dense.row(r).dot(v.head(k));
      int c = d.country.empty() ? -1 : d.country[r];
      int t = d.yearcat.empty() ? -1 : d.yearcat[r];
      if (c >= 0) xv += v(k + c);
      if (t >= 0) xv += v(k + d.n_country + t);
      q(time_pos[d.time[r]]) += xv * resid(r);
    }
    double var = q.squaredNorm();
    for (int lag = 1; lag <= dk_lags; ++lag) {
      double w = 1.0 - static_cast<double>(lag) / (dk_lags + 1);
      double acc = 0.0;
      for (int t = lag; t < T; ++t) acc += q(t) * q(t - lag);
      var += 2.0 * w * acc;
    }
    fit.dense_se(j) = std::sqrt(std::max(var, 0.0));
  }
  return fit;
}

struct HorizonSample {
  FeDesign design;
  int n = 0;
};

// Carves the horizon-h sample out of the prepared panel and builds the
// design. With split = true every dense regressor and the year dummies are
// interacted with the group indicator; country dummies are nested in groups
// already.
HorizonSample build_horizon(const PreparedPanel& prep, const LpSpec& spec,
                            int h, bool split) {
  const int kc = static_cast<int>(spec.controls.size());
  const int kbase = 1 + kc + spec.lags_l;
  const int kdense0 = split ? 2 * kbase : kbase;
  const int kdense = kdense0 + (spec.country_fe ? 0 : (split ? 2 : 1));

  std::vector<Vec> rows;
  std::vector<double> lhs;
  std::vector<int> country, time, group;
  for (const auto& cell : prep.cells) {
    const auto& o = prep.outcome[cell.country_id];
    double ylead = lookup(o, cell.year + h);
    double ybase = lookup(o, cell.year - 1);
    if (std::isnan(ylead) || std::isnan(ybase)) continue;
    Vec base(kbase);
    base(0) = cell.shock;
    base.segment(1, kc) = cell.controls;
    base.segment(1 + kc, spec.lags_l) = cell.dlags;
    Vec dense = Vec::Zero(kdense);
    if (split) {
      dense.segment(cell.group * kbase, kbase) = base;
      if (!spec.country_fe) dense(kdense0 + cell.group) = 1.0;
    } else {
      dense.head(kbase) = base;
      if (!spec.country_fe) dense(kdense0) = 1.0;
    }
    rows.push_back(std::move(dense));
    lhs.push_back(ylead - ybase);
    country.push_back(cell.country_id);
    time.push_back(cell.year);
    group.push_back(cell.group);
  }

  HorizonSample hs;
  hs.n = static_cast<int>(rows.size());
  if (hs.n == 0) {
    std::ostringstream os;
    os << "empty estimation sample at horizon " << h;
    throw DataError(os.str());
  }
  FeDesign& D = hs.design;
  D.dense.resize(hs.n, kdense);
  D.y.resize(hs.n);
  for (int r = 0; r < hs.n; ++r) {
    D.dense.row(r) = rows[r];
    D.y(r) = lhs[r];
  }
  D.time = time;

  if (spec.country_fe) {
    // Compact country ids over the sample.
    std::map<int, int> remap;
    for (int c : country)
      if (!remap.count(c)) remap[c] = 0;
    int next = 0;
    for (auto& [c, id] : remap) id = next++;
    D.n_country = next;
    D.country.resize(hs.n);
    for (int r = 0; r < hs.n; ++r) D.country[r] = remap[country[r]];
  }

  if (spec.year_fe) {
    // Year (or group x year) categories; the first per group is the omitted
    // reference so the dummies are not collinear with the country block.
    std::map<std::pair<int, int>, int> remap;
    for (int r = 0; r < hs.n; ++r)
      remap[{split ? group[r] : 0, time[r]}] = 0;
    std::map<int, bool> ref_seen;
    int next = 0;
    for (auto& [key, id] : remap) {
      if (!ref_seen[key.first]) {
        ref_seen[key.first] = true;
        id = -1;
      } else {
        id = next++;
      }
    }
    D.n_yearcat = next;
    D.yearcat.resize(hs.n);
    for (int r = 0; r < hs.n; ++r)
      D.yearcat[r] = remap[{split ? group[r] : 0, time[r]}];
  }
  return hs;
}

std::map<std::string, std::map<int, double>> shocks_to_map(
    const std::vector<ShockSeries>& shocks) {
  std::map<std::string, std::map<int, double>> m;
  for (const auto& s : shocks) m[s.country] = s.shocks;
  return m;
}

IrfResult make_result(const LpSpec& spec) {
  IrfResult irf;
  irf.z = normal_quantile(0.5 + spec.ci_level / 2.0);
  int T = spec.horizon_T;
  irf.horizons.resize(T + 1);
  for (int h = 0; h <= T; ++h) irf.horizons[h] = h;
  irf.beta.setZero(T + 1);
  irf.se.setZero(T + 1);
  irf.ci_lo.setZero(T + 1);
  irf.ci_hi.setZero(T + 1);
  irf.n_obs.assign(T + 1, 0);
  return irf;
}

void fill_bands(IrfResult& irf, int h, double beta, double se) {
  irf.beta(h) = beta;
  irf.se(h) = se;
  irf.ci_lo(h) = beta - irf.z * se;
  irf.ci_hi(h) = beta + irf.z * se;
}

}  // namespace

IrfResult estimate_lp(const PanelDataset& panel,
                      const std::vector<ShockSeries>& shocks,
                      const OutcomeSpec& outcome, const LpSpec& spec) {
  if (spec.horizon_T < 0 || spec.dk_lags < 0 || spec.ci_level <= 0.0 ||
      spec.ci_level >= 1.0)
    throw ConfigError("invalid LpSpec");
  auto prep = prepare_panel(panel, shocks_to_map(shocks), outcome, spec, nullptr);
  IrfResult irf = make_result(spec);
  irf.log_zero_drops = prep.log_zero_drops;
  // Horizons are independent regressions; assembled in index order.
  for (int h = 0; h <= spec.horizon_T; ++h) {
    auto hs = build_horizon(prep, spec, h, false);
    auto fit = solve_fe(hs.design, spec.dk_lags);
    fill_bands(irf, h, fit.coef(0), fit.dense_se(0));
    irf.n_obs[h] = fit.n;
  }
  return irf;
}

Mat driscoll_kraay_cov(const Vec& residuals, const Mat& regressors,
                       const std::vector<int>& time_index, int lags) {
  const int N = static_cast<int>(regressors.rows());
  const int p = static_cast<int>(regressors.cols());
  if (residuals.size() != N || static_cast<int>(time_index.size()) != N)
    throw DataError("driscoll_kraay_cov: mismatched inputs");

  std::vector<int> times = time_index;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  int T = static_cast<int>(times.size());
  if (lags >= T)
    throw DataError("Driscoll-Kraay: fewer time periods than lags + 1");
  std::map<int, int> pos;
  for (int i = 0; i < T; ++i) pos[times[i]] = i;

  // Cross-sectional score sums h_t.
  Mat H = Mat::Zero(T, p);
  for (int r = 0; r < N; ++r)
    H.row(pos.at(time_index[r])) += regressors.row(r) * residuals(r);

  Mat S = H.transpose() * H;  // Omega_0
  for (int j = 1; j <= lags; ++j) {
    double w = 1.0 - static_cast<double>(j) / (lags + 1);
    Mat Oj = Mat::Zero(p, p);
    for (int t = j; t < T; ++t)
      Oj += H.row(t).transpose() * H.row(t - j);
    S += w * (Oj + Oj.transpose());
  }

  Mat xtx = regressors.transpose() * regressors;
  Eigen::ColPivHouseholderQR<Mat> qr(xtx);
  if (qr.rank() < p)
    throw DataError("driscoll_kraay_cov: singular X'X");
  Mat xtx_inv = qr.inverse();
  return xtx_inv * S * xtx_inv;
}

GroupClassification classify_emission_intensity(const PanelDataset& panel) {
  std::vector<std::pair<std::string, double>> avg;
  for (const auto& c : panel.countries()) {
    auto em = panel.series(c, Field::Emissions);
    auto gdp = panel.series(c, Field::RealGdp);
    double sum = 0;
    int n = 0;
    for (const auto& [t, e] : em) {
      auto g = gdp.find(t);
      if (g == gdp.end()) continue;
      sum += e / g->second;
      ++n;
    }
    if (n > 0) avg.emplace_back(c, sum / n);
  }
  if (avg.size() < 2)
    throw DataError("classify_emission_intensity: fewer than 2 countries");

  std::vector<double> vals;
  for (const auto& [c, v] : avg) vals.push_back(v);
  std::sort(vals.begin(), vals.end());
  size_t m = vals.size();
  double median = (m % 2 == 1) ? vals[m / 2]
                               : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);

  GroupClassification out;
  // Ties at the median go to LOW.
  for (const auto& [c, v] : avg)
    out.group[c] = v > median ? IntensityGroup::High : IntensityGroup::Low;
  return out;
}

std::pair<IrfResult, IrfResult> split_lp(const PanelDataset& panel,
                                         const std::vector<ShockSeries>& shocks,
                                         const OutcomeSpec& outcome,
                                         const LpSpec& spec,
                                         const GroupClassification& groups) {
  auto shock_map = shocks_to_map(shocks);
  // Degenerate-group checks: each group needs >= 2 countries with shocks and
  // shock variation.
  for (auto g : {IntensityGroup::High, IntensityGroup::Low}) {
    std::set<std::string> members;
    std::vector<double> svals;
    for (const auto& [c, gc] : groups.group) {
      if (gc != g) continue;
      if (!shock_map.count(c)) continue;
      members.insert(c);
      for (const auto& [t, v] : shock_map[c]) svals.push_back(v);
    }
    const char* name = g == IntensityGroup::High ? "HIGH" : "LOW";
    if (members.size() < 2) {
      std::ostringstream os;
      os << "split_lp: degenerate group " << name << " ("
         << members.size() << " countries)";
      throw DataError(os.str());
    }
    double mean = 0, var = 0;
    for (double v : svals) mean += v;
    mean /= svals.size();
    for (double v : svals) var += (v - mean) * (v - mean);
    if (var == 0.0) {
      std::ostringstream os;
      os << "split_lp: group " << name << " has no shock variation";
      throw DataError(os.str());
    }
  }

  auto prep = prepare_panel(panel, shock_map, outcome, spec, &groups);
  IrfResult irf_h = make_result(spec);
  IrfResult irf_l = make_result(spec);
  irf_h.log_zero_drops = irf_l.log_zero_drops = prep.log_zero_drops;
  for (int h = 0; h <= spec.horizon_T; ++h) {
    auto hs = build_horizon(prep, spec, h, true);
    auto fit = solve_fe(hs.design, spec.dk_lags);
    int kbase = 1 + static_cast<int>(spec.controls.size()) + spec.lags_l;
    fill_bands(irf_h, h, fit.coef(0), fit.dense_se(0));
    fill_bands(irf_l, h, fit.coef(kbase), fit.dense_se(kbase));
    irf_h.n_obs[h] = irf_l.n_obs[h] = fit.n;
  }
  return {irf_h, irf_l};
}

IrfResult spillover_lp(const PanelDataset& panel,
                       const ShockSeries& source_shocks,
                       const OutcomeSpec& outcome, const LpSpec& spec) {
  // Replicate the common shock across every ally row.
  std::vector<ShockSeries> replicated;
  for (const auto& c : panel.countries()) {
    ShockSeries s = source_shocks;
    s.country = c;
    replicated.push_back(std::move(s));
  }
  return estimate_lp(panel, replicated, outcome, spec);
}

void write_irf_csv(const std::string& path, const IrfResult& irf) {
  std::ostringstream os;
  os << "h,beta,se,lo,hi,n\n";
  for (size_t i = 0; i < irf.horizons.size(); ++i)
    os << irf.horizons[i] << "," << format_double(irf.beta(i)) << ","
       << format_double(irf.se(i)) << "," << format_double(irf.ci_lo(i)) << ","
       << format_double(irf.ci_hi(i)) << "," << irf.n_obs[i] << "\n";
  write_text_atomic(path, os.str());
}

void write_irf_plotdata_csv(const std::string& path, const IrfResult& irf) {
  std::ostringstream os;
  os << "h,series,value\n";
  for (size_t i = 0; i < irf.horizons.size(); ++i) {
    os << irf.horizons[i] << ",beta," << format_double(irf.beta(i)) << "\n";
    os << irf.horizons[i] << ",lo," << format_double(irf.ci_lo(i)) << "\n";
    os << irf.horizons[i] << ",hi," << format_double(irf.ci_hi(i)) << "\n";
  }
  write_text_atomic(path, os.str());
}

}  // namespace milcarb
