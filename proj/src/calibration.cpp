#include "milcarb/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "milcarb/csv.hpp"
#include "milcarb/errors.hpp"

namespace milcarb {

Vec UseTable::balance_gap() const {
  Vec uses = intermediate.rowwise().sum() + household_final + government_final +
             investment_final;
  return (gross_output - uses).cwiseQuotient(gross_output);
}

int Calibration::index_of(const std::string& label) const {
  for (int i = 0; i < n; ++i)
    if (labels[i] == label) return i;
  return -1;
}

void Calibration::validate(double tol) const {
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) throw DataError("calibration invariant violated: " + what);
  };
  check(n > 0, "empty calibration");
  for (int i = 0; i < n; ++i) {
    check(std::abs(omega.col(i).sum() - 1.0) < tol, "omega column sums to 1");
    check(std::abs(chi.col(i).sum() - 1.0) < tol, "chi column sums to 1");
    double exhaustion =
        Delta.row(i).sum() + iota.row(i).sum() + phi(i) + gamma(i);
    check(std::abs(exhaustion - 1.0) < tol, "output exhaustion");
    check(alpha(i) > 0.0 && alpha(i) < 1.0, "alpha in (0,1)");
    // theta = 1 is the no-intermediates boundary.
    check(theta(i) > 0.0 && theta(i) <= 1.0, "theta in (0,1]");
    check(delta_dep(i) > 0.0 && delta_dep(i) <= 1.0, "delta in (0,1]");
  }
  check(std::abs(beta_cons.sum() - 1.0) < tol, "beta_i sums to 1");
  check(std::abs(lambda.sum() - 1.0) < tol, "lambda sums to 1");
  check(std::abs(eps_ind.sum() + eps_hh + eps_govt - 1.0) < tol,
        "emission shares sum to 1");
  check(beta_disc > 0.0 && beta_disc < 1.0, "beta in (0,1)");
  check(frisch > 0.0, "frisch > 0");
  check((Delta.array() >= 0).all() && (iota.array() >= -tol).all(),
        "non-negative shares");
}

Mat invert_total_requirements(const Mat& H, const Vec& gross_output) {
  const int n = static_cast<int>(H.rows());
  if (H.cols() != n || gross_output.size() != n)
    throw DataError("invert_total_requirements: dimension mismatch");
  Eigen::FullPivLU<Mat> lu(H);
  if (!lu.isInvertible())
    throw DataError("invert_total_requirements: singular H");
  Mat A = Mat::Identity(n, n) - lu.inverse();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (A(i, j) < -1e-8) {
        std::ostringstream os;
        os << "invert_total_requirements: A(" << i << "," << j
           << ") = " << A(i, j) << " below -1e-8; inconsistent table";
        throw DataError(os.str());
      }
      if (A(i, j) < 0.0) A(i, j) = 0.0;
    }
  return A * gross_output.asDiagonal();
}

void maintenance_adjustment(Mat& chi, Mat& iota, const Vec& gross_output,
                            double share) {
  const int n = static_cast<int>(chi.rows());
  if (share < 0.0 || share >= 1.0)
    throw DataError("maintenance_adjustment: share outside [0,1)");
  for (int j = 0; j < n; ++j)
    if (std::abs(chi.col(j).sum() - 1.0) > 1e-8)
      throw DataError("maintenance_adjustment: chi columns must sum to 1");

  // Column investment totals in value, recovered from iota and gross output.
  Vec col_value = (gross_output.asDiagonal() * iota).colwise().sum();
  chi *= (1.0 - share);
  chi.diagonal().array() += share;
  iota *= (1.0 - share);
  for (int i = 0; i < n; ++i)
    if (gross_output(i) > 0.0)
      iota(i, i) += share * col_value(i) / gross_output(i);

  // The diagonal exists to make hub-dominated networks invertible; when the
  // caller asks for an actual adjustment and the matrix is still singular,
  // the input is pathological.
  if (share > 0.0) {
    Eigen::FullPivLU<Mat> lu(chi);
    if (!lu.isInvertible())
      throw DataError(
          "maintenance_adjustment: investment network still singular");
  }
}

namespace {

Mat column_shares(const Mat& flows) {
  const int n = static_cast<int>(flows.rows());
  Mat out = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double tot = flows.col(j).sum();
    if (tot <= 0.0) {
      std::ostringstream os;
      os << "investment network column " << j << " has no inflows";
      throw DataError(os.str());
    }
    out.col(j) = flows.col(j) / tot;
  }
  return out;
}

}  // namespace

Calibration build_calibration(const UseTable& use_in,
                              const std::vector<InvestmentNetwork>& networks,
                              const Mat& depreciation,
                              const EmissionLevels& emissions,
                              const CalibrationConfig& config,
                              BalanceReport* report) {
  const int n = use_in.n;
  if (networks.empty()) throw DataError("no investment networks supplied");
  if (depreciation.cols() != n)
    throw DataError("depreciation columns do not match industry count");
  if (emissions.industry.size() != n)
    throw DataError("emission levels do not match industry count");
  for (int i = 0; i < n; ++i)
    if (use_in.gross_output(i) <= 0.0)
      throw DataError("industry with zero gross output: " + use_in.labels[i]);

  BalanceReport local_report;
  BalanceReport& rep = report ? *report : local_report;

  // chi: per-year column shares, averaged, then maintenance-adjusted.
  Mat chi = Mat::Zero(n, n);
  for (const auto& net : networks) chi += column_shares(net.flows);
  chi /= static_cast<double>(networks.size());

  // iota from the target year's network, put through the same adjustment.
  int target_year = config.target_year;
  if (target_year == 0)
    for (const auto& net : networks) target_year = std::max(target_year, net.year);
  const InvestmentNetwork* target = nullptr;
  for (const auto& net : networks)
    if (net.year == target_year) target = &net;
  if (!target) {
    std::ostringstream os;
    os << "no investment network for target year " << target_year;
    throw DataError(os.str());
  }
  Vec col_value = target->flows.colwise().sum();
  Mat target_shares = column_shares(target->flows);
  Mat iota(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      iota(i, j) = target_shares(i, j) * col_value(j) / use_in.gross_output(i);
  maintenance_adjustment(chi, iota, use_in.gross_output,
                         config.maintenance_share);

  // The adjusted network pins investment deliveries; household and
  // government final demand absorb any residual slack proportionally.
  UseTable use = use_in;
  use.investment_final =
      (use_in.gross_output.asDiagonal() * iota).rowwise().sum();
  Vec gap = use.balance_gap();
  rep.max_rel_gap = gap.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    double slack = gap(i) * use.gross_output(i);
    if (std::abs(gap(i)) <= 1e-6) continue;
    double hh = use.household_final(i), gv = use.government_final(i);
    double base = hh + gv;
    if (base <= 0.0) {
      use.household_final(i) += slack;
    } else {
      use.household_final(i) += slack * hh / base;
      use.government_final(i) += slack * gv / base;
    }
    ++rep.adjusted_rows;
    std::ostringstream os;
    os << "balanced row " << use.labels[i] << " (rel gap " << gap(i) << ")";
    rep.notes.push_back(os.str());
  }

  Calibration c;
  c.n = n;
  c.labels = use.labels;
  c.beta_disc = config.beta_disc;
  c.frisch = config.frisch;
  c.base_mil_share = config.base_mil_share;
  c.chi = chi;
  c.iota = iota;

  c.Delta = use.gross_output.cwiseInverse().asDiagonal() * use.intermediate;
  c.phi = use.household_final.cwiseQuotient(use.gross_output);
  c.gamma = use.government_final.cwiseQuotient(use.gross_output);
  c.lambda = use.labor_comp / use.labor_comp.sum();
  Vec va = use.labor_comp + use.capital_comp;
  c.alpha = use.labor_comp.cwiseQuotient(va);
  c.theta = va.cwiseQuotient(use.gross_output);
  // Industries with no intermediate purchases (theta = 1) get a self-share
  // column; the bundle carries zero weight in production either way.
  c.omega = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double tot = use.intermediate.col(j).sum();
    if (tot > 0.0)
      c.omega.col(j) = use.intermediate.col(j) / tot;
    else
      c.omega(j, j) = 1.0;
  }
  c.beta_cons = use.household_final / use.household_final.sum();
  c.delta_dep = depreciation.colwise().mean();

  double total_emissions =
      emissions.industry.sum() + emissions.household + emissions.government;
  if (total_emissions <= 0.0) throw DataError("total emissions must be > 0");
  c.eps_ind = emissions.industry / total_emissions;
  c.eps_hh = emissions.household / total_emissions;
  c.eps_govt = emissions.government / total_emissions;

  c.output_weight = use.gross_output / use.gross_output.sum();

  for (const auto& label : config.weapon_industries) {
    int idx = c.index_of(label);
    if (idx < 0) throw DataError("weapon industry not found: " + label);
    c.weapon_set.push_back(idx);
  }
  for (const auto& label : config.energy_industries) {
    int idx = c.index_of(label);
    if (idx < 0) throw DataError("energy industry not found: " + label);
    c.energy_set.push_back(idx);
  }

  // S_P / S_E default to the weapon/energy government purchases over GDP
  // (the use table cannot isolate the military part, so overrides are the
  // norm with real data).
  double gdp = use.household_final.sum() + use.government_final.sum() +
               use.investment_final.sum();
  double sp = 0, se = 0;
  for (int i : c.weapon_set) sp += use.government_final(i);
  for (int i : c.energy_set) se += use.government_final(i);
  c.S_P = config.S_P_override.value_or(sp / gdp);
  c.S_E = config.S_E_override.value_or(se / gdp);

  c.validate();
  return c;
}

UseTable synthesize_use_table(const Calibration& calib,
                              const Vec& gross_output) {
  const int n = calib.n;
  UseTable use;
  use.n = n;
  use.labels = calib.labels;
  use.gross_output = gross_output;
  use.intermediate = gross_output.asDiagonal() * calib.Delta;
  use.labor_comp = calib.alpha.cwiseProduct(calib.theta)
                       .cwiseProduct(gross_output);
  use.capital_comp = (Vec::Ones(n) - calib.alpha)
                         .cwiseProduct(calib.theta)
                         .cwiseProduct(gross_output);
  use.household_final = calib.phi.cwiseProduct(gross_output);
  use.government_final = calib.gamma.cwiseProduct(gross_output);
  use.investment_final =
      (gross_output.asDiagonal() * calib.iota).rowwise().sum();
  return use;
}

Mat synthesize_investment_flows(const Calibration& calib,
                                const Vec& gross_output) {
  return gross_output.asDiagonal() * calib.iota;
}

UseTable aggregate_use_table(const UseTable& use,
                             const std::vector<int>& target_of_source,
                             const std::vector<std::string>& target_labels) {
  const int n = use.n;
  const int m = static_cast<int>(target_labels.size());
  if (static_cast<int>(target_of_source.size()) != n)
    throw DataError("aggregation map does not cover every industry");
  for (int t : target_of_source)
    if (t < 0 || t >= m) throw DataError("aggregation map index out of range");

  UseTable out;
  out.n = m;
  out.labels = target_labels;
  out.intermediate = Mat::Zero(m, m);
  out.labor_comp = Vec::Zero(m);
  out.capital_comp = Vec::Zero(m);
  out.household_final = Vec::Zero(m);
  out.government_final = Vec::Zero(m);
  out.investment_final = Vec::Zero(m);
  out.gross_output = Vec::Zero(m);
  for (int i = 0; i < n; ++i) {
    int ti = target_of_source[i];
    for (int j = 0; j < n; ++j)
      out.intermediate(ti, target_of_source[j]) += use.intermediate(i, j);
    out.labor_comp(ti) += use.labor_comp(i);
    out.capital_comp(ti) += use.capital_comp(i);
    out.household_final(ti) += use.household_final(i);
    out.government_final(ti) += use.government_final(i);
    out.investment_final(ti) += use.investment_final(i);
    out.gross_output(ti) += use.gross_output(i);
  }
  return out;
}

namespace {

Vec read_vector_column(const CsvTable& csv, const std::string& name,
                       const std::string& path) {
  int col = csv.require_column(name);
  Vec out(csv.rows.size());
  for (size_t i = 0; i < csv.rows.size(); ++i) {
    std::ostringstream ctx;
    ctx << path << " row " << i + 2 << " column " << name;
    out(i) = parse_numeric(csv.rows[i][col], ctx.str());
    if (std::isnan(out(i)))
      throw DataError("missing value at " + ctx.str());
  }
  return out;
}

Mat read_flow_block(const CsvTable& csv, const std::string& prefix,
                    const std::string& path) {
  const int n = static_cast<int>(csv.rows.size());
  Mat out(n, n);
  for (int j = 0; j < n; ++j) {
    std::ostringstream name;
    name << prefix << j + 1;
    int col = csv.require_column(name.str());
    for (int i = 0; i < n; ++i) {
      std::ostringstream ctx;
      ctx << path << " row " << i + 2 << " column " << name.str();
      out(i, j) = parse_numeric(csv.rows[i][col], ctx.str());
      if (std::isnan(out(i, j)))
        throw DataError("missing value at " + ctx.str());
    }
  }
  return out;
}

}  // namespace

UseTable read_use_table_csv(const std::string& path) {
  CsvTable csv = read_csv(path);
  UseTable use;
  use.n = static_cast<int>(csv.rows.size());
  int lab = csv.require_column("industry");
  for (const auto& row : csv.rows) use.labels.push_back(row[lab]);
  use.intermediate = read_flow_block(csv, "x_", path);
  use.labor_comp = read_vector_column(csv, "labor_comp", path);
  use.capital_comp = read_vector_column(csv, "capital_comp", path);
  use.household_final = read_vector_column(csv, "household_final", path);
  use.government_final = read_vector_column(csv, "government_final", path);
  use.investment_final = read_vector_column(csv, "investment_final", path);
  use.gross_output = read_vector_column(csv, "gross_output", path);
  if ((use.intermediate.array() < 0).any() ||
      (use.gross_output.array() <= 0).any())
    throw DataError(path + ": negative flows or non-positive gross output");
  return use;
}

InvestmentNetwork read_investment_network_csv(const std::string& path,
                                              int year) {
  CsvTable csv = read_csv(path);
  InvestmentNetwork net;
  net.year = year;
  net.flows = read_flow_block(csv, "i_", path);
  if ((net.flows.array() < 0).any())
    throw DataError(path + ": negative investment flows");
  return net;
}

IndustryMapping read_mapping_csv(const std::string& path,
                                 const std::vector<std::string>& source_labels) {
  CsvTable csv = read_csv(path);
  int c_src = csv.require_column("source");
  int c_tgt = csv.require_column("target_index");
  int c_lab = csv.column("target_label");

  std::map<std::string, int> target_of;
  std::map<int, std::string> label_of;
  int max_target = 0;
  for (size_t i = 0; i < csv.rows.size(); ++i) {
    std::ostringstream ctx;
    ctx << path << " row " << i + 2;
    int tgt = static_cast<int>(parse_numeric(csv.rows[i][c_tgt], ctx.str()));
    if (tgt < 1) throw DataError("target_index must be >= 1 at " + ctx.str());
    target_of[csv.rows[i][c_src]] = tgt - 1;
    max_target = std::max(max_target, tgt);
    if (c_lab >= 0 && !csv.rows[i][c_lab].empty())
      label_of[tgt - 1] = csv.rows[i][c_lab];
  }

  IndustryMapping m;
  for (const auto& label : source_labels) {
    auto it = target_of.find(label);
    if (it == target_of.end())
      throw DataError("mapping.csv does not cover industry: " + label);
    m.target_of_source.push_back(it->second);
  }
  for (int t = 0; t < max_target; ++t) {
    auto it = label_of.find(t);
    m.target_labels.push_back(it != label_of.end()
                                  ? it->second
                                  : "group_" + std::to_string(t + 1));
  }
  return m;
}

namespace {

Mat aggregate_flows(const Mat& flows, const std::vector<int>& map, int m) {
  Mat out = Mat::Zero(m, m);
  for (int i = 0; i < flows.rows(); ++i)
    for (int j = 0; j < flows.cols(); ++j)
      out(map[i], map[j]) += flows(i, j);
  return out;
}

}  // namespace

Calibration load_calibration_dir(const std::string& dir,
                                 BalanceReport* report) {
  namespace fs = std::filesystem;
  auto kv = KeyValueFile::load(dir + "/config.txt");
  CalibrationConfig config;
  config.beta_disc = kv.get_double_or("beta", 0.98);
  config.frisch = kv.get_double_or("xi", 0.4);
  config.maintenance_share = kv.get_double_or("maintenance_share", 0.125);
  config.weapon_industries = kv.get_list_or("weapon_industries");
  config.energy_industries = kv.get_list_or("energy_industries");
  config.base_mil_share = kv.get_double_or("base_mil_share", 0.033);
  config.S_P_override = kv.maybe_double("S_P");
  config.S_E_override = kv.maybe_double("S_E");
  config.target_year = kv.get_int_or("target_year", 0);

  UseTable use = read_use_table_csv(dir + "/use_table.csv");

  std::vector<InvestmentNetwork> networks;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    const std::string prefix = "investment_network_";
    if (name.rfind(prefix, 0) == 0 && name.size() >= prefix.size() + 8) {
      int year = std::stoi(name.substr(prefix.size(), 4));
      networks.push_back(
          read_investment_network_csv(entry.path().string(), year));
    }
  }
  std::sort(networks.begin(), networks.end(),
            [](const auto& a, const auto& b) { return a.year < b.year; });
  if (networks.empty())
    throw DataError(dir + ": no investment_network_<YYYY>.csv files");

  CsvTable dep_csv = read_csv(dir + "/depreciation.csv");
  Mat depreciation(dep_csv.rows.size(), use.n);
  for (int j = 0; j < use.n; ++j) {
    std::ostringstream name;
    name << "d_" << j + 1;
    int col = dep_csv.require_column(name.str());
    for (size_t i = 0; i < dep_csv.rows.size(); ++i) {
      std::ostringstream ctx;
      ctx << dir << "/depreciation.csv row " << i + 2;
      depreciation(i, j) = parse_numeric(dep_csv.rows[i][col], ctx.str());
    }
  }

  CsvTable em_csv = read_csv(dir + "/emissions_shares.csv");
  int ent = em_csv.require_column("entity");
  int lev = em_csv.require_column("level");
  EmissionLevels emissions;
  emissions.industry = Vec::Zero(use.n);
  for (size_t i = 0; i < em_csv.rows.size(); ++i) {
    std::ostringstream ctx;
    ctx << dir << "/emissions_shares.csv row " << i + 2;
    double level = parse_numeric(em_csv.rows[i][lev], ctx.str());
    const std::string& who = em_csv.rows[i][ent];
    if (who == "household") {
      emissions.household = level;
    } else if (who == "government") {
      emissions.government = level;
    } else {
      auto it = std::find(use.labels.begin(), use.labels.end(), who);
      if (it == use.labels.end())
        throw DataError("unknown industry in emissions_shares.csv: " + who);
      emissions.industry(it - use.labels.begin()) = level;
    }
  }

  // Optional partition contraction (e.g. 71 -> 41 industries): flows and
  // emission levels sum; depreciation averages with capital weights.
  if (fs::exists(dir + "/mapping.csv")) {
    auto mapping = read_mapping_csv(dir + "/mapping.csv", use.labels);
    int m = static_cast<int>(mapping.target_labels.size());
    for (auto& net : networks)
      net.flows = aggregate_flows(net.flows, mapping.target_of_source, m);
    Mat dep_agg = Mat::Zero(depreciation.rows(), m);
    Vec wsum = Vec::Zero(m);
    for (int i = 0; i < use.n; ++i) {
      int t = mapping.target_of_source[i];
      dep_agg.col(t) += use.capital_comp(i) * depreciation.col(i);
      wsum(t) += use.capital_comp(i);
    }
    for (int t = 0; t < m; ++t) dep_agg.col(t) /= wsum(t);
    depreciation = dep_agg;
    Vec em_agg = Vec::Zero(m);
    for (int i = 0; i < use.n; ++i)
      em_agg(mapping.target_of_source[i]) += emissions.industry(i);
    emissions.industry = em_agg;
    use = aggregate_use_table(use, mapping.target_of_source,
                              mapping.target_labels);
  }

  return build_calibration(use, networks, depreciation, emissions, config,
                           report);
}

std::string Calibration::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["labels"] = labels;
  auto mat = [](const Mat& m) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < m.rows(); ++i) {
      std::vector<double> r(m.cols());
      for (int k = 0; k < m.cols(); ++k) r[k] = m(i, k);
      rows.push_back(std::move(r));
    }
    return rows;
  };
  auto vec = [](const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["Delta"] = mat(Delta);
  j["iota"] = mat(iota);
  j["omega"] = mat(omega);
  j["chi"] = mat(chi);
  j["phi"] = vec(phi);
  j["gamma"] = vec(gamma);
  j["lambda"] = vec(lambda);
  j["alpha"] = vec(alpha);
  j["theta"] = vec(theta);
  j["delta"] = vec(delta_dep);
  j["beta_cons"] = vec(beta_cons);
  j["eps_industry"] = vec(eps_ind);
  j["eps_household"] = eps_hh;
  j["eps_government"] = eps_govt;
  j["beta"] = beta_disc;
  j["xi"] = frisch;
  j["weapon_set"] = weapon_set;
  j["energy_set"] = energy_set;
  j["base_mil_share"] = base_mil_share;
  j["S_P"] = S_P;
  j["S_E"] = S_E;
  j["output_weight"] = vec(output_weight);
  return j.dump(2);
}

}  // namespace milcarb
