#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "milcarb/calibration.hpp"
#include "milcarb/errors.hpp"

using namespace milcarb;

namespace {

// Symmetric 3-industry toy: all intermediate flows 1.5, labor = capital,
// equal finals. Column identity pins gross output at 9.
UseTable symmetric_toy() {
  UseTable use;
  use.n = 3;
  use.labels = {"alpha", "bravo", "charlie"};
  use.intermediate = Mat::Constant(3, 3, 1.5);
  use.labor_comp = Vec::Constant(3, 2.25);
  use.capital_comp = Vec::Constant(3, 2.25);
  use.household_final = Vec::Constant(3, 2.7);
  use.government_final = Vec::Constant(3, 0.9);
  use.investment_final = Vec::Constant(3, 0.9);
  use.gross_output = Vec::Constant(3, 9.0);
  return use;
}

InvestmentNetwork uniform_network(int year, double column_total = 0.9) {
  InvestmentNetwork net;
  net.year = year;
  net.flows = Mat::Constant(3, 3, column_total / 3.0);
  return net;
}

CalibrationConfig toy_config() {
  CalibrationConfig cfg;
  cfg.weapon_industries = {"alpha"};
  cfg.energy_industries = {"bravo"};
  cfg.maintenance_share = 0.0;
  return cfg;
}

EmissionLevels toy_emissions() {
  EmissionLevels em;
  em.industry = Vec::Constant(3, 10.0);
  em.household = 3.0;
  em.government = 1.0;
  return em;
}

Mat toy_depreciation() { return Mat::Constant(2, 3, 0.1); }

}  // namespace

TEST_CASE("invert_total_requirements: identity gives no flows") {
  Mat H = Mat::Identity(3, 3);
  Vec go = Vec::Constant(3, 5.0);
  CHECK(invert_total_requirements(H, go).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("invert_total_requirements recovers a known 2x2 matrix") {
  Mat A(2, 2);
  A << 0.1, 0.2, 0.3, 0.1;
  Mat H = (Mat::Identity(2, 2) - A).inverse();
  Vec go(2);
  go << 10, 20;
  Mat flows = invert_total_requirements(H, go);
  Mat expect = A * go.asDiagonal();
  CHECK((flows - expect).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("invert_total_requirements round-trips random substochastic matrices") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> U(0, 1);
  for (int rep = 0; rep < 10; ++rep) {
    int n = 5;
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = U(rng);
    for (int j = 0; j < n; ++j) A.col(j) *= 0.8 * U(rng) / A.col(j).sum();
    Mat H = (Mat::Identity(n, n) - A).inverse();
    Vec go = Vec::Ones(n) * 3.0;
    Mat flows = invert_total_requirements(H, go);
    CHECK((flows - A * go.asDiagonal()).lpNorm<Eigen::Infinity>() < 1e-10);
  }
  // Inconsistent table: a clearly negative implied flow.
  Mat H = Mat::Identity(2, 2);
  H(0, 1) = -0.5;
  CHECK_THROWS_AS(invert_total_requirements(H, Vec::Ones(2)), DataError);
}

TEST_CASE("build_calibration on the symmetric toy hits the closed forms") {
  std::vector<InvestmentNetwork> nets = {uniform_network(2016),
                                         uniform_network(2017)};
  auto calib = build_calibration(symmetric_toy(), nets, toy_depreciation(),
                                 toy_emissions(), toy_config());
  CHECK(calib.n == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(calib.alpha(i) == doctest::Approx(0.5));
    CHECK(calib.theta(i) == doctest::Approx(0.5));
    CHECK(calib.phi(i) == doctest::Approx(0.3));
    CHECK(calib.gamma(i) == doctest::Approx(0.1));
    CHECK(calib.lambda(i) == doctest::Approx(1.0 / 3));
    CHECK(calib.beta_cons(i) == doctest::Approx(1.0 / 3));
    for (int j = 0; j < 3; ++j) {
      CHECK(calib.omega(i, j) == doctest::Approx(1.0 / 3));
      CHECK(calib.chi(i, j) == doctest::Approx(1.0 / 3));
      CHECK(calib.Delta(i, j) == doctest::Approx(1.5 / 9.0));
    }
  }
  CHECK(calib.eps_ind.sum() + calib.eps_hh + calib.eps_govt ==
        doctest::Approx(1.0));
  CHECK(calib.weapon_set == std::vector<int>{0});
  // S_P defaults to weapon government purchases over GDP = 0.9 / 13.5.
  CHECK(calib.S_P == doctest::Approx(0.9 / 13.5));
}

TEST_CASE("build_calibration boundary: no intermediate inputs") {
  UseTable use = symmetric_toy();
  use.intermediate.setZero();
  use.labor_comp = Vec::Constant(3, 3.0);
  use.capital_comp = Vec::Constant(3, 1.5);
  use.household_final = Vec::Constant(3, 2.7);
  use.government_final = Vec::Constant(3, 0.9);
  use.investment_final = Vec::Constant(3, 0.9);
  use.gross_output = Vec::Constant(3, 4.5);
  std::vector<InvestmentNetwork> nets = {uniform_network(2017)};
  auto calib = build_calibration(use, nets, toy_depreciation(),
                                 toy_emissions(), toy_config());
  CHECK(calib.Delta.lpNorm<Eigen::Infinity>() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(calib.theta(i) == doctest::Approx(1.0));
}

TEST_CASE("build_calibration invariants on a randomized balanced table") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.2, 1.0);
  const int n = 5;
  // Construct a balanced table from shares: pick column structure, then
  // solve for gross output so rows and columns are consistent.
  Mat omega(n, n);
  Vec theta(n), alpha(n);
  for (int j = 0; j < n; ++j) {
    theta(j) = 0.35 + 0.4 * U(rng);
    alpha(j) = 0.4 + 0.4 * U(rng);
    for (int i = 0; i < n; ++i) omega(i, j) = U(rng);
    omega.col(j) /= omega.col(j).sum();
  }
  Vec final_demand(n);
  for (int i = 0; i < n; ++i) final_demand(i) = 5.0 + 10.0 * U(rng);
  Mat coeff(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      coeff(i, j) = omega(i, j) * (1.0 - theta(j));
  Vec go = (Mat::Identity(n, n) - coeff).partialPivLu().solve(final_demand);

  UseTable use;
  use.n = n;
  for (int i = 0; i < n; ++i) use.labels.push_back("ind" + std::to_string(i));
  use.intermediate = coeff * go.asDiagonal();
  use.labor_comp = alpha.cwiseProduct(theta).cwiseProduct(go);
  use.capital_comp =
      (Vec::Ones(n) - alpha).cwiseProduct(theta).cwiseProduct(go);
  use.gross_output = go;
  // Split final demand into household, government, investment.
  use.household_final = 0.6 * final_demand;
  use.government_final = 0.15 * final_demand;
  use.investment_final = 0.25 * final_demand;

  std::vector<InvestmentNetwork> nets;
  for (int year : {2015, 2016, 2017}) {
    InvestmentNetwork net;
    net.year = year;
    net.flows.resize(n, n);
    for (int j = 0; j < n; ++j) {
      Vec col(n);
      for (int i = 0; i < n; ++i) col(i) = U(rng);
      col /= col.sum();
      net.flows.col(j) = col * (1.0 + U(rng));
    }
    nets.push_back(std::move(net));
  }
  Mat dep = Mat::Constant(3, n, 0.12);
  EmissionLevels em;
  em.industry = Vec::Constant(n, 2.0);
  em.household = 1.0;
  em.government = 0.5;
  CalibrationConfig cfg;
  cfg.weapon_industries = {"ind0"};
  cfg.energy_industries = {"ind1"};

  BalanceReport report;
  auto calib = build_calibration(use, nets, dep, em, cfg, &report);
  // The network's deliveries replace the investment column, so household
  // and government picked up the slack; exhaustion then holds exactly.
  for (int i = 0; i < n; ++i) {
    double exhaustion = calib.Delta.row(i).sum() + calib.iota.row(i).sum() +
                        calib.phi(i) + calib.gamma(i);
    CHECK(std::fabs(exhaustion - 1.0) < 1e-10);
    CHECK(std::fabs(calib.omega.col(i).sum() - 1.0) < 1e-12);
    CHECK(std::fabs(calib.chi.col(i).sum() - 1.0) < 1e-12);
  }
  CHECK(std::fabs(calib.lambda.sum() - 1.0) < 1e-12);
  CHECK(std::fabs(calib.beta_cons.sum() - 1.0) < 1e-12);
  CHECK(calib.chi.diagonal().minCoeff() >= 0.125);  // maintenance diagonal
}

TEST_CASE("build_calibration is invariant to rescaling currency units") {
  auto use = symmetric_toy();
  std::vector<InvestmentNetwork> nets = {uniform_network(2017)};
  auto base = build_calibration(use, nets, toy_depreciation(), toy_emissions(),
                                toy_config());
  UseTable scaled = use;
  double k = 7.25;
  scaled.intermediate *= k;
  scaled.labor_comp *= k;
  scaled.capital_comp *= k;
  scaled.household_final *= k;
  scaled.government_final *= k;
  scaled.investment_final *= k;
  scaled.gross_output *= k;
  std::vector<InvestmentNetwork> nets2 = {uniform_network(2017, 0.9 * 3)};
  nets2[0].flows = nets[0].flows * k;
  auto re = build_calibration(scaled, nets2, toy_depreciation(),
                              toy_emissions(), toy_config());
  CHECK((base.Delta - re.Delta).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((base.iota - re.iota).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((base.phi - re.phi).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((base.theta - re.theta).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(base.S_P == doctest::Approx(re.S_P));
}

TEST_CASE("round trip: calibration -> synthetic table -> same calibration") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.2, 1.0);
  // Start from the fixture calibration (already self-consistent).
  auto calib = load_calibration_dir(std::string(MILCARB_FIXTURE_DIR) +
                                    "/calib_us41");
  // The regenerated table must sit at the calibration's own relative
  // outputs: omega, chi and lambda are only reproduced at those weights.
  Vec go = 1234.5 * calib.output_weight;
  (void)U;
  UseTable use = synthesize_use_table(calib, go);
  CHECK(use.balance_gap().lpNorm<Eigen::Infinity>() < 1e-12);

  Mat flows = synthesize_investment_flows(calib, go);
  // Undo the maintenance adjustment so the pipeline's own adjustment brings
  // chi back.
  Vec col_value = flows.colwise().sum();
  InvestmentNetwork net;
  net.year = 2017;
  net.flows.resize(calib.n, calib.n);
  for (int j = 0; j < calib.n; ++j) {
    Vec share = flows.col(j) / col_value(j);
    share(j) -= 0.125;
    share /= 0.875;
    net.flows.col(j) = share.cwiseMax(0.0) * col_value(j);
  }
  Mat dep(1, calib.n);
  dep.row(0) = calib.delta_dep;
  EmissionLevels em;
  em.industry = calib.eps_ind * 1000.0;
  em.household = calib.eps_hh * 1000.0;
  em.government = calib.eps_govt * 1000.0;
  CalibrationConfig cfg;
  for (int i : calib.weapon_set) cfg.weapon_industries.push_back(calib.labels[i]);
  for (int i : calib.energy_set) cfg.energy_industries.push_back(calib.labels[i]);
  cfg.S_P_override = calib.S_P;
  cfg.S_E_override = calib.S_E;
  cfg.base_mil_share = calib.base_mil_share;

  auto re = build_calibration(use, {net}, dep, em, cfg);
  CHECK((re.Delta - calib.Delta).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((re.iota - calib.iota).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((re.omega - calib.omega).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((re.chi - calib.chi).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((re.phi - calib.phi).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((re.gamma - calib.gamma).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((re.alpha - calib.alpha).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((re.theta - calib.theta).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((re.lambda - calib.lambda).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("maintenance_adjustment: share zero is the identity") {
  Mat chi = Mat::Constant(2, 2, 0.5);
  Mat iota = Mat::Constant(2, 2, 0.05);
  Vec go = Vec::Constant(2, 10.0);
  Mat chi0 = chi, iota0 = iota;
  maintenance_adjustment(chi, iota, go, 0.0);
  CHECK((chi - chi0).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((iota - iota0).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("maintenance_adjustment puts 12.5% on a zero diagonal") {
  Mat chi(2, 2);
  chi << 0, 0, 1, 1;  // industry 2 supplies all investment
  Mat iota(2, 2);
  iota << 0, 0, 0.2, 0.1;
  Vec go = Vec::Constant(2, 10.0);
  maintenance_adjustment(chi, iota, go, 0.125);
  CHECK(chi(0, 0) == doctest::Approx(0.125));
  CHECK(chi(1, 1) == doctest::Approx(0.125 + 0.875));
  CHECK(chi.col(0).sum() == doctest::Approx(1.0));
  CHECK(chi.col(1).sum() == doctest::Approx(1.0));
  // Column investment totals preserved.
  CHECK((go.asDiagonal() * iota).colwise().sum()(0) == doctest::Approx(2.0));
  CHECK((go.asDiagonal() * iota).colwise().sum()(1) == doctest::Approx(1.0));
}

TEST_CASE("maintenance_adjustment makes a rank-deficient hub network invertible") {
  // Four-hub structure: every column is the same mix of 4 supplier rows,
  // so the raw matrix has rank 4 << n.
  const int n = 10;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.1, 1.0);
  Mat chi = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < 4; ++k) chi(k, j) = U(rng);
    chi.col(j) /= chi.col(j).sum();
  }
  Mat iota = Mat::Constant(n, n, 0.01);
  Vec go = Vec::Constant(n, 5.0);
  Eigen::FullPivLU<Mat> pre(chi);
  CHECK(pre.rank() == 4);
  CHECK(!pre.isInvertible());
  maintenance_adjustment(chi, iota, go, 0.125);
  Eigen::FullPivLU<Mat> post(chi);
  CHECK(post.isInvertible());
  for (int j = 0; j < n; ++j) CHECK(chi.col(j).sum() == doctest::Approx(1.0));
}

TEST_CASE("aggregate_use_table sums flows under a many-to-one mapping") {
  auto use = symmetric_toy();
  std::vector<int> mapping = {0, 0, 1};  // alpha+bravo -> M, charlie -> S
  auto agg = aggregate_use_table(use, mapping, {"M", "S"});
  CHECK(agg.n == 2);
  CHECK(agg.gross_output(0) == doctest::Approx(18.0));
  CHECK(agg.gross_output(1) == doctest::Approx(9.0));
  CHECK(agg.intermediate(0, 0) == doctest::Approx(4 * 1.5));
  CHECK(agg.intermediate(0, 1) == doctest::Approx(2 * 1.5));
  CHECK(agg.labor_comp(0) == doctest::Approx(4.5));
  // Balance is preserved by aggregation.
  CHECK(agg.balance_gap().lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK_THROWS_AS(aggregate_use_table(use, {0, 0}, {"M"}), DataError);
}

TEST_CASE("fixture calibration loads, validates, and flags the industry sets") {
  BalanceReport report;
  auto calib = load_calibration_dir(
      std::string(MILCARB_FIXTURE_DIR) + "/calib_us41", &report);
  CHECK(calib.n == 41);
  CHECK(report.adjusted_rows == 0);  // generated table balances exactly
  CHECK(calib.weapon_set.size() == 2);
  CHECK(calib.energy_set.size() == 2);
  CHECK(calib.S_P == doctest::Approx(0.0066));
  CHECK(calib.beta_disc == doctest::Approx(0.98));
  CHECK(calib.frisch == doctest::Approx(0.4));
  calib.validate(1e-10);
}

TEST_CASE("zero gross output is rejected") {
  auto use = symmetric_toy();
  use.gross_output(1) = 0.0;
  std::vector<InvestmentNetwork> nets = {uniform_network(2017)};
  CHECK_THROWS_AS(build_calibration(use, nets, toy_depreciation(),
                                    toy_emissions(), toy_config()),
                  DataError);
}

TEST_CASE("load_calibration_dir applies mapping.csv when present") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "milcarb_mapdir";
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
  };
  // 3 source industries; a and b merge into M, c becomes S.
  write("use_table.csv",
        "industry,x_1,x_2,x_3,labor_comp,capital_comp,household_final,"
        "government_final,investment_final,gross_output\n"
        "a,1.5,1.5,1.5,2.25,2.25,2.7,0.9,0.9,9\n"
        "b,1.5,1.5,1.5,2.25,2.25,2.7,0.9,0.9,9\n"
        "c,1.5,1.5,1.5,2.25,2.25,2.7,0.9,0.9,9\n");
  write("investment_network_2017.csv",
        "industry,i_1,i_2,i_3\na,0.3,0.3,0.3\nb,0.3,0.3,0.3\nc,0.3,0.3,0.3\n");
  write("depreciation.csv", "year,d_1,d_2,d_3\n2016,0.1,0.2,0.15\n");
  write("emissions_shares.csv",
        "entity,level\na,10\nb,10\nc,10\nhousehold,3\ngovernment,1\n");
  write("config.txt",
        "weapon_industries = M\nenergy_industries = S\n"
        "maintenance_share = 0\n");
  write("mapping.csv",
        "source,target_index,target_label\na,1,M\nb,1,M\nc,2,S\n");
  auto calib = load_calibration_dir(dir.string());
  CHECK(calib.n == 2);
  CHECK(calib.labels == std::vector<std::string>{"M", "S"});
  CHECK(calib.eps_ind(0) == doctest::Approx(20.0 / 34.0));
  // Capital-weighted depreciation: equal weights here.
  CHECK(calib.delta_dep(0) == doctest::Approx(0.15));
  CHECK(calib.delta_dep(1) == doctest::Approx(0.15));
  calib.validate();

  std::ofstream(dir / "mapping.csv") << "source,target_index\na,1\nb,1\n";
  CHECK_THROWS_AS(load_calibration_dir(dir.string()), DataError);
  fs::remove_all(dir);
}
