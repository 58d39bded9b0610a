// Generates the synthetic fixtures shipped under data/fixtures/: a
// 41-industry calibration directory built from a solved level-space steady
// state (so every share identity holds by construction), a 20-country
// 1970-2016 panel, and scenario files. Deterministic: fixed seeds, full
// double precision in the CSVs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "level_model.hpp"
#include "milcarb/csv.hpp"
#include "milcarb/types.hpp"

namespace {

using milcarb::Mat;
using milcarb::Vec;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::vector<std::string> kIndustries = {
    "Farms",
    "Forestry, fishing, and related activities",
    "Oil and gas extraction",
    "Mining, except oil and gas",
    "Support activities for mining",
    "Utilities",
    "Construction",
    "Wood products",
    "Nonmetallic mineral products",
    "Primary metals",
    "Fabricated metal products",
    "Machinery",
    "Computer and electronic products",
    "Electrical equipment, appliances, and components",
    "Motor vehicles, bodies and trailers, and parts",
    "Other transportation equipment",
    "Furniture and related products",
    "Miscellaneous manufacturing",
    "Food and beverage and tobacco products",
    "Textile mills and textile product mills",
    "Apparel and leather and allied products",
    "Paper products",
    "Printing and related support activities",
    "Petroleum and coal products",
    "Chemical products",
    "Plastics and rubber products",
    "Wholesale trade",
    "Retail trade",
    "Transportation and warehousing",
    "Information",
    "Finance and insurance",
    "Real estate and rental and leasing",
    "Professional, scientific, and technical services",
    "Management of companies and enterprises",
    "Administrative and waste management services",
    "Educational services",
    "Health care and social assistance",
    "Arts, entertainment, and recreation",
    "Accommodation and food services",
    "Other services, except government",
    "Government enterprises",
};

// index helpers (0-based)
const int kOilGas = 2, kUtilities = 5, kConstruction = 6, kPrimaryMetals = 9,
          kFabMetal = 10, kMachinery = 11, kComputers = 12, kVehicles = 14,
          kOtherTransport = 15, kPetroleum = 23, kChemicals = 24,
          kPlastics = 25, kProfServices = 32;

milcarb::level::LevelEconomy build_us41(std::mt19937_64& rng) {
  const int n = static_cast<int>(kIndustries.size());
  std::uniform_real_distribution<double> U(0.0, 1.0);
  milcarb::level::LevelEconomy e;
  e.n = n;
  e.labels = kIndustries;
  e.alpha.resize(n);
  e.theta.resize(n);
  e.delta.resize(n);
  e.beta_cons.resize(n);
  e.gov_demand = Vec::Ones(n);

  for (int i = 0; i < n; ++i) {
    e.alpha(i) = 0.5 + 0.25 * U(rng);
    e.theta(i) = 0.4 + 0.25 * U(rng);
    e.delta(i) = 0.09 + 0.12 * U(rng);
  }
  // Capital-heavy network industries.
  e.alpha(kUtilities) = 0.35;
  e.alpha(kOilGas) = 0.4;
  e.theta(kUtilities) = 0.55;
  e.theta(kPetroleum) = 0.25;  // refining is intermediate-heavy

  // Consumption basket: services-heavy with positive weight everywhere.
  for (int i = 0; i < n; ++i) e.beta_cons(i) = 0.2 + 0.8 * U(rng);
  for (int i : {27, 28, 30, 31, 36, 38, 39})  // retail, finance, health...
    e.beta_cons(i) += 2.5;
  e.beta_cons(kUtilities) += 1.0;
  e.beta_cons /= e.beta_cons.sum();

  // Intermediate shares: broad base plus energy, materials and services
  // columns that supply everyone.
  e.omega = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) e.omega(i, j) = 0.1 + 0.9 * U(rng);
    e.omega(j, j) += 2.0;
    e.omega(kUtilities, j) += 2.0;
    e.omega(kPetroleum, j) += 1.2;
    e.omega(kProfServices, j) += 2.0;
    e.omega(31, j) += 1.5;  // real estate
    e.omega(26, j) += 1.5;  // wholesale margins
  }
  // Weapon producers pull hard on energy-intensive materials.
  for (int j : {kFabMetal, kOtherTransport, kVehicles, kMachinery}) {
    e.omega(kPrimaryMetals, j) += 5.0;
    e.omega(kPlastics, j) += 2.5;
    e.omega(kChemicals, j) += 1.5;
    e.omega(kComputers, j) += 2.0;
  }
  e.omega(kPrimaryMetals, kFabMetal) += 3.0;
  // Refining runs on crude; utilities burn fuel.
  e.omega(kOilGas, kPetroleum) += 25.0;
  e.omega(kOilGas, kUtilities) += 6.0;
  e.omega(kPetroleum, 28) += 3.0;  // transportation
  for (int j = 0; j < n; ++j) e.omega.col(j) /= e.omega.col(j).sum();

  // Investment network: four supplier hubs (construction, machinery,
  // vehicles, professional services/software) dominate every column; the
  // shipped files carry these raw columns and the pipeline adds the 12.5%
  // maintenance diagonal.
  Mat hub = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    hub(kConstruction, j) = 0.36 + 0.1 * U(rng);
    hub(kMachinery, j) = 0.22 + 0.08 * U(rng);
    hub(kVehicles, j) = 0.1 + 0.05 * U(rng);
    hub(kProfServices, j) = 0.14 + 0.08 * U(rng);
    hub(kComputers, j) = 0.06 + 0.04 * U(rng);
    hub(kFabMetal, j) = 0.02 + 0.02 * U(rng);
    hub.col(j) /= hub.col(j).sum();
  }
  e.chi = 0.875 * hub;
  e.chi.diagonal().array() += 0.125;

  return e;
}

// Nominal government purchases implied by an output vector. Purchases from
// the weapon and energy industries are pinned to S_P and S_E of GDP so the
// shock multipliers size the spending injection consistently; civilian
// purchases are fixed shares of each industry's output.
Mat nominal_gov_targets(const milcarb::level::LevelEconomy& econ,
                        const milcarb::level::LevelSolution& sol,
                        double S_P, double S_E) {
  const int n = econ.n;
  const Vec& s = sol.nominal_output;
  Vec civ = Vec::Constant(n, 0.008);
  civ(kComputers) = 0.02;
  civ(kProfServices) = 0.03;
  civ(36) = 0.09;  // health care
  civ(35) = 0.12;  // education
  civ(kConstruction) = 0.04;
  civ(kFabMetal) = civ(kOtherTransport) = 0.0;
  civ(kUtilities) = civ(kPetroleum) = 0.0;
  double psi_sum = sol.inv_flows.sum();
  double gdp = sol.nominal_consumption + psi_sum + civ.dot(s);
  // GDP depends on the defense block itself; one round of feedback is
  // enough inside the outer fixed-point loop.
  gdp /= (1.0 - S_P - S_E);
  Vec g = civ.cwiseProduct(s);
  g(kFabMetal) = 0.3 * S_P * gdp;
  g(kOtherTransport) = 0.7 * S_P * gdp;
  g(kUtilities) = 0.6 * S_E * gdp;
  g(kPetroleum) = 0.4 * S_E * gdp;
  return g;
}

void write_calibration_fixture(const std::string& dir, std::mt19937_64& rng) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto econ = build_us41(rng);
  const int n = econ.n;
  const double S_P = 0.0066, S_E = 0.00066;

  // Fixed point on real government demand so the purchase shares come out
  // exactly at their targets in the final steady state.
  econ.gov_demand = Vec::Constant(n, 1e-3);
  milcarb::level::LevelSolution sol;
  for (int pass = 0; pass < 60; ++pass) {
    sol = milcarb::level::solve_level_steady(econ);
    Vec target = nominal_gov_targets(econ, sol, S_P, S_E);
    Vec next = target.cwiseQuotient(sol.price);
    double change = ((next - econ.gov_demand)
                         .cwiseQuotient(next.cwiseAbs().array().max(1e-300).matrix()))
                        .lpNorm<Eigen::Infinity>();
    econ.gov_demand = next;
    if (change < 1e-14) break;
  }
  sol = milcarb::level::solve_level_steady(econ);

  // use_table.csv
  {
    std::ostringstream os;
    os << "industry";
    for (int j = 0; j < n; ++j) os << ",x_" << j + 1;
    os << ",labor_comp,capital_comp,household_final,government_final,"
          "investment_final,gross_output\n";
    for (int i = 0; i < n; ++i) {
      os << "\"" << econ.labels[i] << "\"";
      for (int j = 0; j < n; ++j) os << "," << fmt(sol.x_flows(i, j));
      double labor = econ.alpha(i) * econ.theta(i) * sol.nominal_output(i);
      double capital =
          (1.0 - econ.alpha(i)) * econ.theta(i) * sol.nominal_output(i);
      double hh = sol.nominal_consumption * econ.beta_cons(i);
      double gov = sol.price(i) * econ.gov_demand(i);
      double inv = sol.inv_flows.row(i).sum();
      os << "," << fmt(labor) << "," << fmt(capital) << "," << fmt(hh) << ","
         << fmt(gov) << "," << fmt(inv) << "," << fmt(sol.nominal_output(i))
         << "\n";
    }
    milcarb::write_text_atomic(dir + "/use_table.csv", os.str());
  }

  // Investment networks: the target year carries exactly the un-adjusted
  // column shares; the flanking years wobble around them with a zero-sum
  // perturbation so the average reproduces the target shares.
  {
    Vec col_value = sol.inv_flows.colwise().sum();
    Mat shares(n, n);
    for (int j = 0; j < n; ++j) {
      Vec raw = sol.inv_flows.col(j) / col_value(j);
      // Undo the maintenance diagonal to get the raw (hub) column; clamp
      // the floating-point dust this leaves on exact zeros.
      raw(j) -= 0.125;
      raw /= 0.875;
      shares.col(j) = raw.cwiseMax(0.0);
    }
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Mat wobble = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      // Shift weight between the two largest hub rows, keeping columns
      // stochastic and entries positive.
      double eps = 0.1 * shares(kMachinery, j) * U(rng);
      wobble(kConstruction, j) = eps;
      wobble(kMachinery, j) = -eps;
    }
    auto write_net = [&](int year, const Mat& colshares) {
      std::ostringstream os;
      os << "industry";
      for (int j = 0; j < n; ++j) os << ",i_" << j + 1;
      os << "\n";
      for (int i = 0; i < n; ++i) {
        os << "\"" << econ.labels[i] << "\"";
        for (int j = 0; j < n; ++j)
          os << "," << fmt(colshares(i, j) * col_value(j));
        os << "\n";
      }
      std::ostringstream name;
      name << dir << "/investment_network_" << year << ".csv";
      milcarb::write_text_atomic(name.str(), os.str());
    };
    write_net(2015, shares + wobble);
    write_net(2016, shares - wobble);
    write_net(2017, shares);
  }

  // depreciation.csv: three years whose mean is the model's delta.
  {
    std::ostringstream os;
    os << "year";
    for (int j = 0; j < n; ++j) os << ",d_" << j + 1;
    os << "\n";
    for (int k = -1; k <= 1; ++k) {
      os << 2016 + k;
      for (int j = 0; j < n; ++j)
        os << "," << fmt(econ.delta(j) + 0.005 * k);
      os << "\n";
    }
    milcarb::write_text_atomic(dir + "/depreciation.csv", os.str());
  }

  // emissions_shares.csv: scope-1 levels, Mt CO2e flavored.
  {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec levels(n);
    for (int i = 0; i < n; ++i) levels(i) = 5.0 + 20.0 * U(rng);
    levels(kUtilities) = 1700.0;
    levels(kPetroleum) = 520.0;
    levels(kOilGas) = 330.0;
    levels(28) = 610.0;  // transportation and warehousing
    levels(kPrimaryMetals) = 260.0;
    levels(kChemicals) = 190.0;
    levels(0) = 390.0;   // farms
    levels(3) = 70.0;    // mining
    levels(kPlastics) = 45.0;
    std::ostringstream os;
    os << "entity,level\n";
    for (int i = 0; i < n; ++i)
      os << "\"" << econ.labels[i] << "\"," << fmt(levels(i)) << "\n";
    os << "household," << fmt(760.0) << "\n";
    os << "government," << fmt(52.0) << "\n";
    milcarb::write_text_atomic(dir + "/emissions_shares.csv", os.str());
  }

  // config.txt
  {
    std::ostringstream os;
    os << "# synthetic US-style 41-industry calibration\n"
       << "beta = 0.98\n"
       << "xi = 0.4\n"
       << "maintenance_share = 0.125\n"
       << "target_year = 2017\n"
       << "weapon_industries = Fabricated metal products; Other "
          "transportation equipment\n"
       << "energy_industries = Utilities; Petroleum and coal products\n"
       << "base_mil_share = 0.033\n"
       << "# example values: roughly 20% and 2% of a 3.3% spending share\n"
       << "S_P = 0.0066\n"
       << "S_E = 0.00066\n";
    milcarb::write_text_atomic(dir + "/config.txt", os.str());
  }
}

void write_panel_fixture(const std::string& path, std::mt19937_64& rng) {
  const std::vector<std::string> countries = {
      "BEL", "BGR", "CAN", "DNK", "FIN", "FRA", "DEU", "GRC", "HUN", "ITA",
      "NLD", "NOR", "POL", "PRT", "ROU", "ESP", "SWE", "TUR", "GBR", "USA"};
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  // Hump response of log emissions to spending shocks, peaking at 6 years.
  auto hump = [](int h) {
    if (h < 0 || h > 12) return 0.0;
    double s = std::sin(M_PI * h / 12.0);
    return 1.5 * s * s;
  };

  std::ostringstream os;
  os << "country,year,mil_share,nominal_gdp,real_gdp,deflator,emissions,"
        "energy_use,gdp_pc,exports,imports,democracy,steel,patents_total,"
        "patents_green\n";
  for (const auto& c : countries) {
    double base_share = c == "USA" ? 0.055 : 0.012 + 0.03 * U(rng);
    double gdp0 = c == "USA" ? 1.0e12 : 2e10 + 4e11 * U(rng);
    double pop = c == "USA" ? 2.1e8 : 5e6 + 6e7 * U(rng);
    double em0 = gdp0 * (2.0e-7 + 4.0e-7 * U(rng));
    double dem = 0.55 + 0.4 * U(rng);
    double patents0 = c == "USA" ? 40000 : U(rng) < 0.3 ? 0.0 : 50 + 4000 * U(rng);

    std::vector<double> z(47 + 13, 0.0);  // share deviations incl. pre-sample
    for (size_t t = 1; t < z.size(); ++t)
      z[t] = 0.75 * z[t - 1] + 0.08 * N(rng);
    double g_real = 0.02 + 0.015 * U(rng);
    double infl = 0.02 + 0.03 * U(rng);

    for (int t = 0; t < 47; ++t) {
      int year = 1970 + t;
      int zt = t + 13;
      double share = base_share * std::exp(z[zt]);
      double real_gdp = gdp0 * std::exp(g_real * t + 0.01 * N(rng));
      double deflator = std::exp(infl * t + 0.005 * N(rng));
      double nominal = real_gdp * deflator;
      // Embedded response: emissions react to past share deviations with a
      // hump, so the pipeline recovers sensible IRFs.
      double resp = 0.0;
      for (int h = 0; h <= 12; ++h)
        resp += hump(h) * 100.0 * base_share * z[zt - h];
      double emissions = em0 * std::pow(real_gdp / gdp0, 0.7) *
                         std::exp(-0.004 * t + 0.01 * resp + 0.02 * N(rng));
      double energy = emissions * (1.1 + 0.1 * U(rng)) * 0.5;
      double exports = nominal * (0.2 + 0.1 * U(rng));
      double imports = nominal * (0.2 + 0.1 * U(rng));
      dem = std::clamp(dem + 0.01 * N(rng), 0.3, 0.98);
      double steel = real_gdp * (1.5e-8 + 1e-8 * U(rng)) * std::exp(0.3 * z[zt]);
      double pat_total = patents0 * std::exp(0.01 * t + 0.05 * N(rng));
      double pat_green = pat_total * (0.03 + 0.02 * U(rng));

      os << c << "," << year << "," << fmt(share) << "," << fmt(nominal)
         << "," << fmt(real_gdp) << "," << fmt(deflator) << ","
         << fmt(emissions) << "," << fmt(energy) << ","
         << fmt(real_gdp / pop) << "," << fmt(exports) << "," << fmt(imports)
         << "," << fmt(dem) << "," << fmt(steel) << ",";
      if (patents0 > 0.0)
        os << fmt(pat_total) << "," << fmt(pat_green);
      else
        os << ",";  // missing patent columns for non-innovating countries
      os << "\n";
    }
  }
  milcarb::write_text_atomic(path, os.str());
}

void write_scenarios(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  milcarb::write_text_atomic(dir + "/baseline_permanent.txt",
                             "preset = baseline\nE_pp = 1\nrho = 1\n"
                             "scc = 190\nbase_emissions_t = 6.09e9\n"
                             "base_gdp = 1.95e13\n");
  milcarb::write_text_atomic(dir + "/baseline_temporary.txt",
                             "preset = baseline\nE_pp = 1\nrho = 0.86\n");
  milcarb::write_text_atomic(dir + "/doubling.txt",
                             "preset = baseline\nE_pp = 3.3\nrho = 1\n"
                             "scc = 190\nbase_emissions_t = 6.09e9\n"
                             "base_gdp = 1.95e13\n");
  milcarb::write_text_atomic(
      dir + "/korean_war_level.txt",
      "preset = baseline\ntarget_share_pct = 13.9\nrho = 1\n");
}

}  // namespace

int main(int argc, char** argv) {
  std::string root = argc > 1 ? argv[1] : "data/fixtures";
  std::mt19937_64 rng_cal(20170913);
  write_calibration_fixture(root + "/calib_us41", rng_cal);
  std::mt19937_64 rng_panel(19700101);
  write_panel_fixture(root + "/panel_nato.csv", rng_panel);
  write_scenarios(root + "/scenarios");
  std::cout << "fixtures written under " << root << "\n";
  return 0;
}
