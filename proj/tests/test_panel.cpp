#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "milcarb/errors.hpp"
#include "milcarb/panel.hpp"

using namespace milcarb;

namespace {

const char* kHeader =
    "country,year,mil_share,nominal_gdp,real_gdp,deflator,emissions,"
    "energy_use,gdp_pc,exports,imports,democracy,steel,patents_total,"
    "patents_green\n";

std::string write_temp(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path.string();
}

std::string row(const std::string& c, int y, double share, double ngdp = 100,
                double rgdp = 100, double defl = 1) {
  std::ostringstream os;
  os << c << "," << y << "," << share << "," << ngdp << "," << rgdp << ","
     << defl << ",10,5,30,20,20,0.8,1,5,1\n";
  return os.str();
}

}  // namespace

TEST_CASE("load_panel round-trips a well-formed two-country file") {
  std::string body = kHeader;
  for (int y = 1990; y < 1993; ++y) body += row("USA", y, 0.05);
  for (int y = 1990; y < 1993; ++y) body += row("FRA", y, 0.03);
  auto panel = load_panel(write_temp("milcarb_p1.csv", body));
  CHECK(panel.rows().size() == 6);
  CHECK(panel.countries() == std::vector<std::string>{"FRA", "USA"});
  CHECK(panel.find("USA", 1991)->mil_share == doctest::Approx(0.05));
  CHECK(panel.find("USA", 1999) == nullptr);
  CHECK(panel.diagnostics().empty());
}

TEST_CASE("duplicate (country, year) is a hard error") {
  std::string body = kHeader;
  body += row("USA", 1990, 0.05);
  body += row("USA", 1990, 0.06);
  CHECK_THROWS_AS(load_panel(write_temp("milcarb_p2.csv", body)), DataError);
}

TEST_CASE("rows violating value invariants are rejected with diagnostics") {
  std::string body = kHeader;
  body += row("USA", 1990, 0.05);
  body += row("USA", 1991, 1.5);        // share above 1
  body += row("USA", 1992, 0.05, 100, -3);  // negative real GDP
  auto panel = load_panel(write_temp("milcarb_p3.csv", body));
  CHECK(panel.rows().size() == 1);
  REQUIRE(panel.diagnostics().size() >= 2);
  CHECK(panel.diagnostics()[0].rejected);
  CHECK(panel.diagnostics()[0].year == 1991);
}

TEST_CASE("year gaps are flagged, not fatal") {
  std::string body = kHeader;
  body += row("USA", 1990, 0.05);
  body += row("USA", 1992, 0.05);
  auto panel = load_panel(write_temp("milcarb_p4.csv", body));
  CHECK(panel.rows().size() == 2);
  bool flagged = false;
  for (const auto& d : panel.diagnostics())
    if (!d.rejected && d.message.find("gap") != std::string::npos) flagged = true;
  CHECK(flagged);
}

TEST_CASE("schema maps custom column names") {
  std::string body =
      "iso,yr,milexp_share,ngdp,rgdp,pdefl,co2,tce,ypc,exp,imp,polyarchy,"
      "crude_steel\nUSA,1990,0.05,100,100,1,10,5,30,20,20,0.8,1\n";
  auto schema = KeyValueFile::parse(
      "country = iso\nyear = yr\nmil_share = milexp_share\n"
      "nominal_gdp = ngdp\nreal_gdp = rgdp\ndeflator = pdefl\n"
      "emissions = co2\nenergy_use = tce\ngdp_pc = ypc\nexports = exp\n"
      "imports = imp\ndemocracy = polyarchy\nsteel = crude_steel\n",
      "schema");
  auto panel = load_panel(write_temp("milcarb_p5.csv", body), schema);
  CHECK(panel.rows().size() == 1);
  CHECK(std::isnan(panel.rows()[0].patents_total));  // optional column absent
}

TEST_CASE("missing required column is an error") {
  std::string body = "country,year,mil_share\nUSA,1990,0.05\n";
  CHECK_THROWS_AS(load_panel(write_temp("milcarb_p6.csv", body)), DataError);
}

TEST_CASE("synthetic NATO fixture has 20 x 47 rows") {
  auto panel = load_panel(std::string(MILCARB_FIXTURE_DIR) + "/panel_nato.csv");
  CHECK(panel.countries().size() == 20);
  CHECK(panel.rows().size() == 940);
  CHECK(panel.years().front() == 1970);
  CHECK(panel.years().back() == 2016);
}

TEST_CASE("quadratic_trend reproduces exact polynomials") {
  std::map<int, double> s;
  for (int t = 1990; t < 2010; ++t) {
    double x = t - 2000.0;
    s[t] = 2.0 + 3.0 * x + x * x;
  }
  auto fit = quadratic_trend(s);
  for (const auto& [t, v] : s) CHECK(fit.at(t) == doctest::Approx(v).epsilon(1e-12));

  std::map<int, double> flat;
  for (int t = 0; t < 6; ++t) flat[t] = 4.2;
  for (const auto& [t, v] : quadratic_trend(flat))
    CHECK(v == doctest::Approx(4.2).epsilon(1e-12));

  std::map<int, double> three = {{1, 1.0}, {2, 2.0}, {3, 3.0}};
  CHECK_THROWS_AS(quadratic_trend(three), DataError);
}

TEST_CASE("quadratic_trend matches an independent normal-equations solve") {
  // Cubic series: the fit differs from the data, so compare against a
  // hand-rolled 3x3 normal-equations solution on the centered basis.
  std::map<int, double> s;
  for (int t = 1970; t < 2017; ++t) {
    double x = t - 1970.0;
    s[t] = 5 + 0.5 * x - 0.02 * x * x + 0.001 * x * x * x;
  }
  int n = static_cast<int>(s.size());
  double tbar = 0;
  for (auto& [t, v] : s) tbar += t;
  tbar /= n;
  double m[3][3] = {{0}}, b[3] = {0};
  for (auto& [t, v] : s) {
    double c[3] = {1.0, t - tbar, (t - tbar) * (t - tbar)};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += c[i] * c[j];
      b[i] += c[i] * v;
    }
  }
  // Gaussian elimination, partial pivoting.
  int order[3] = {0, 1, 2};
  for (int k = 0; k < 3; ++k) {
    int p = k;
    for (int i = k + 1; i < 3; ++i)
      if (std::fabs(m[order[i]][k]) > std::fabs(m[order[p]][k])) p = i;
    std::swap(order[k], order[p]);
    for (int i = k + 1; i < 3; ++i) {
      double f = m[order[i]][k] / m[order[k]][k];
      for (int j = k; j < 3; ++j) m[order[i]][j] -= f * m[order[k]][j];
      b[order[i]] -= f * b[order[k]];
    }
  }
  double beta[3];
  for (int k = 2; k >= 0; --k) {
    double acc = b[order[k]];
    for (int j = k + 1; j < 3; ++j) acc -= m[order[k]][j] * beta[j];
    beta[k] = acc / m[order[k]][k];
  }
  auto fit = quadratic_trend(s);
  for (auto& [t, v] : s) {
    double x = t - tbar;
    double expect = beta[0] + beta[1] * x + beta[2] * x * x;
    CHECK(std::fabs(fit.at(t) - expect) < 1e-9);
  }
}

TEST_CASE("gordon_krenn: trend equal to actual GDP reduces to the share") {
  std::string body = kHeader;
  for (int t = 0; t < 12; ++t) {
    double x = t - 6.0;
    double rgdp = 100 + 2 * x + 0.3 * x * x;  // exactly quadratic
    std::ostringstream os;
    os << "USA," << 1990 + t << ",0.04," << rgdp << "," << rgdp << ",1"
       << ",10,5,30,20,20,0.8,1,,\n";
    body += os.str();
  }
  auto panel = load_panel(write_temp("milcarb_gk1.csv", body));
  auto gk = gordon_krenn(panel, "USA");
  for (const auto& [t, v] : gk.values)
    CHECK(v == doctest::Approx(0.04).epsilon(1e-10));
}

TEST_CASE("gordon_krenn constant economy gives a constant series") {
  std::string body = kHeader;
  for (int t = 0; t < 10; ++t) body += row("USA", 1990 + t, 0.04, 200, 100, 2);
  auto panel = load_panel(write_temp("milcarb_gk2.csv", body));
  auto gk = gordon_krenn(panel, "USA");
  for (const auto& [t, v] : gk.values)
    CHECK(v == doctest::Approx(0.04 * 200 / 2.0 / 100.0).epsilon(1e-10));
}

TEST_CASE("gordon_krenn matches a two-step oracle on a growth path") {
  std::string body = kHeader;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::map<int, double> share, ngdp, rgdp, defl;
  for (int t = 0; t < 30; ++t) {
    int year = 1980 + t;
    share[year] = 0.02 + 0.01 * U(rng);
    rgdp[year] = 100 * std::exp(0.02 * t + 0.05 * U(rng));
    defl[year] = std::exp(0.03 * t);
    ngdp[year] = rgdp[year] * defl[year];
    std::ostringstream os;
    os.precision(17);
    os << "USA," << year << "," << share[year] << "," << ngdp[year] << ","
       << rgdp[year] << "," << defl[year] << ",10,5,30,20,20,0.8,1,,\n";
    body += os.str();
  }
  auto panel = load_panel(write_temp("milcarb_gk3.csv", body));
  auto gk = gordon_krenn(panel, "USA");
  // Oracle: recompute m* and the trend independently.
  std::map<int, double> mstar;
  for (auto& [t, v] : share) mstar[t] = v * ngdp[t] / defl[t];
  auto trend = quadratic_trend(rgdp);
  for (auto& [t, v] : gk.values)
    CHECK(std::fabs(v - mstar[t] / trend[t]) < 1e-10);
}

TEST_CASE("hall_barro_redlick difference quotient") {
  std::string body = kHeader;
  // Constant real military spending: m* = share * ngdp / defl constant.
  for (int t = 0; t < 10; ++t)
    body += row("AAA", 1990 + t, 0.04, 100 * (1 + t), 100, 1 + t);
  // Doubling m* against known lagged GDP.
  body += row("BBB", 1990, 0.01, 100, 100, 1);  // m* = 1
  body += row("BBB", 1991, 0.02, 100, 50, 1);   // m* = 2, Y^R_1990 = 100
  auto panel = load_panel(write_temp("milcarb_hbr1.csv", body));

  auto hbr_a = hall_barro_redlick(panel, "AAA");
  CHECK(hbr_a.values.size() == 9);  // first year absent
  for (const auto& [t, v] : hbr_a.values) CHECK(std::fabs(v) < 1e-12);

  auto hbr_b = hall_barro_redlick(panel, "BBB");
  CHECK(hbr_b.values.at(1991) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("hall_barro_redlick matchs the difference-quotient oracle on a random walk") {
  std::string body = kHeader;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 1.0);
  std::map<int, double> share, ngdp, rgdp, defl;
  double level = 0.03;
  for (int t = 0; t < 25; ++t) {
    int year = 1990 + t;
    level = std::max(0.005, level + 0.002 * N(rng));
    share[year] = level;
    rgdp[year] = 100 + 5 * N(rng) + t;
    defl[year] = std::exp(0.02 * t);
    ngdp[year] = rgdp[year] * defl[year];
    std::ostringstream os;
    os.precision(17);
    os << "USA," << year << "," << share[year] << "," << ngdp[year] << ","
       << rgdp[year] << "," << defl[year] << ",10,5,30,20,20,0.8,1,,\n";
    body += os.str();
  }
  auto panel = load_panel(write_temp("milcarb_hbr2.csv", body));
  auto hbr = hall_barro_redlick(panel, "USA");
  CHECK(hbr.values.size() == share.size() - 1);
  for (const auto& [t, v] : hbr.values) {
    double m1 = share[t] * ngdp[t] / defl[t];
    double m0 = share[t - 1] * ngdp[t - 1] / defl[t - 1];
    CHECK(std::fabs(v - (m1 - m0) / rgdp[t - 1]) < 1e-12);
  }
}

TEST_CASE("hall_barro_redlick rejects year gaps") {
  std::string body = kHeader;
  body += row("USA", 1990, 0.04);
  body += row("USA", 1992, 0.04);
  auto panel = load_panel(write_temp("milcarb_hbr3.csv", body));
  CHECK_THROWS_AS(hall_barro_redlick(panel, "USA"), DataError);
}

TEST_CASE("gordon_krenn is invariant to rescaling nominal quantities") {
  std::string body = kHeader, body2 = kHeader;
  for (int t = 0; t < 15; ++t) {
    double rgdp = 100 * std::exp(0.02 * t), defl = std::exp(0.01 * t);
    std::ostringstream a, b;
    a.precision(17);
    b.precision(17);
    a << "USA," << 1990 + t << ",0.03," << rgdp * defl << "," << rgdp << ","
      << defl << ",10,5,30,20,20,0.8,1,,\n";
    // Common rescaling of the deflator (hence nominal GDP and spending).
    b << "USA," << 1990 + t << ",0.03," << 7 * rgdp * defl << "," << rgdp
      << "," << 7 * defl << ",10,5,30,20,20,0.8,1,,\n";
    body += a.str();
    body2 += b.str();
  }
  auto gk1 = gordon_krenn(load_panel(write_temp("milcarb_gk4.csv", body)), "USA");
  auto gk2 = gordon_krenn(load_panel(write_temp("milcarb_gk5.csv", body2)), "USA");
  for (const auto& [t, v] : gk1.values)
    CHECK(v == doctest::Approx(gk2.values.at(t)).epsilon(1e-12));
}
