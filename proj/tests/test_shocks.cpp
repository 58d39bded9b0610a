#include <doctest.h>

#include <cmath>
#include <random>

#include "milcarb/errors.hpp"
#include "milcarb/ols.hpp"
#include "milcarb/shocks.hpp"

using namespace milcarb;

TEST_CASE("ols: exact fit has zero residuals") {
  Mat X(8, 2);
  Vec b(2);
  b << 1.5, -0.5;
  for (int i = 0; i < 8; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = i;
  }
  Vec y = X * b;
  auto fit = ols(y, X);
  CHECK(fit.residuals.lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(fit.coefficients(0) == doctest::Approx(1.5));
}

TEST_CASE("ols: intercept-only regression returns the mean") {
  Vec y(5);
  y << 1, 2, 3, 4, 10;
  Mat X = Mat::Ones(5, 1);
  auto fit = ols(y, X);
  CHECK(fit.coefficients(0) == doctest::Approx(4.0));
}

TEST_CASE("ols matches a normal-equations oracle on a random system") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0, 1);
  Mat X(50, 3);
  Vec y(50);
  for (int i = 0; i < 50; ++i) {
    X(i, 0) = 1;
    X(i, 1) = N(rng);
    X(i, 2) = N(rng);
    y(i) = 2 + 0.5 * X(i, 1) - X(i, 2) + 0.1 * N(rng);
  }
  auto fit = ols(y, X);
  Vec oracle = (X.transpose() * X).fullPivLu().solve(X.transpose() * y);
  CHECK((fit.coefficients - oracle).lpNorm<Eigen::Infinity>() < 1e-9);
  // Residual orthogonality invariant.
  Vec dots = X.transpose() * fit.residuals;
  CHECK(dots.lpNorm<Eigen::Infinity>() / y.norm() < 1e-8);
}

TEST_CASE("ols rejects rank deficiency and short samples") {
  Mat X(5, 2);
  X.col(0).setOnes();
  X.col(1).setOnes();
  Vec y = Vec::Ones(5);
  CHECK_THROWS_AS(ols(y, X), DataError);
  Mat X2 = Mat::Ones(2, 2);
  CHECK_THROWS_AS(ols(Vec::Ones(2), X2), DataError);
}

TEST_CASE("normal_quantile hits standard values") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.84) == doctest::Approx(0.994457883210).epsilon(1e-9));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540).epsilon(1e-9));
  CHECK(normal_quantile(0.975) == doctest::Approx(-normal_quantile(0.025)).epsilon(1e-12));
}

namespace {
TransformedSeries series_of(const std::vector<double>& vals, int start = 1970) {
  TransformedSeries s;
  s.country = "USA";
  for (size_t i = 0; i < vals.size(); ++i) s.values[start + i] = vals[i];
  return s;
}
}  // namespace

TEST_CASE("hamilton_shocks: deterministic linear series gives zero shocks") {
  std::vector<double> vals;
  for (int t = 0; t < 30; ++t) vals.push_back(0.02 + 0.0005 * t);
  auto shocks = hamilton_shocks(series_of(vals), 2, 2);
  CHECK(shocks.shocks.size() == 30 - 2 - 2);
  for (const auto& [t, v] : shocks.shocks) CHECK(std::fabs(v) < 1e-10);
}

TEST_CASE("hamilton_shocks h=1 equals the one-step OLS forecast error oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N(0, 0.01);
  std::vector<double> vals;
  for (int t = 0; t < 40; ++t) vals.push_back(0.03 + N(rng));
  int h = 1, l = 2;
  auto shocks = hamilton_shocks(series_of(vals), h, l);
  // Oracle: explicit regression of M_{t+1} on {1, M_t, M_{t-1}, M_{t-2}}.
  int n = static_cast<int>(vals.size()) - h - l;
  Mat X(n, l + 2);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    int t = i + l;  // origin index into vals
    y(i) = vals[t + h];
    X(i, 0) = 1;
    for (int j = 0; j <= l; ++j) X(i, 1 + j) = vals[t - j];
  }
  Vec beta = (X.transpose() * X).fullPivLu().solve(X.transpose() * y);
  Vec resid = y - X * beta;
  for (int i = 0; i < n; ++i) {
    int year = 1970 + i + l + h;
    CHECK(std::fabs(shocks.shocks.at(year) - 100.0 * resid(i)) < 1e-10);
  }
}

TEST_CASE("hamilton_shocks dates an injected innovation at tau + h") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> N(0, 0.0005);
  std::vector<double> vals(60);
  vals[0] = 0.03;
  const int tau_idx = 35;
  for (size_t t = 1; t < vals.size(); ++t) {
    double eps = N(rng);
    if (static_cast<int>(t) == tau_idx) eps += 0.01;  // +1 p.p. innovation
    vals[t] = 0.03 + 0.8 * (vals[t - 1] - 0.03) + eps;
  }
  int h = 2;
  auto shocks = hamilton_shocks(series_of(vals), h, 2);
  int argmax = 0;
  double best = -1;
  for (const auto& [t, v] : shocks.shocks)
    if (std::fabs(v) > best) {
      best = std::fabs(v);
      argmax = t;
    }
  // The innovation surprises the h-step forecast at its realization date.
  CHECK(argmax == 1970 + tau_idx);
  CHECK(shocks.horizon_h == 2);
}

TEST_CASE("hamilton_shocks invariants: mean zero, constant shift, count") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0, 0.002);
  std::vector<double> vals, shifted;
  for (int t = 0; t < 35; ++t) {
    double v = 0.02 + 0.004 * std::sin(t * 0.7) + N(rng);
    vals.push_back(v);
    shifted.push_back(v + 0.05);
  }
  auto s1 = hamilton_shocks(series_of(vals), 2, 2);
  auto s2 = hamilton_shocks(series_of(shifted), 2, 2);
  CHECK(static_cast<int>(s1.shocks.size()) == 35 - 2 - 2);
  double mean = 0, sd = 0;
  for (auto& [t, v] : s1.shocks) mean += v;
  mean /= s1.shocks.size();
  for (auto& [t, v] : s1.shocks) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / s1.shocks.size());
  CHECK(std::fabs(mean) < 1e-8 * std::max(sd, 1e-30));
  // The intercept absorbs a constant shift.
  for (auto& [t, v] : s1.shocks)
    CHECK(v == doctest::Approx(s2.shocks.at(t)).epsilon(1e-8));
}

TEST_CASE("hamilton_shocks enforces the minimum-sample guard") {
  std::vector<double> vals(14, 0.02);  // need h + l + 1 + 10 = 15
  CHECK_THROWS_AS(hamilton_shocks(series_of(vals), 2, 2), DataError);
}

TEST_CASE("hamilton_shocks never spans year gaps") {
  TransformedSeries s;
  s.country = "USA";
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N(0, 0.001);
  for (int t = 1970; t <= 2010; ++t) {
    if (t == 1990) continue;  // gap
    s.values[t] = 0.02 + N(rng);
  }
  auto shocks = hamilton_shocks(s, 2, 2);
  // Origins whose lag window or lead touches 1990 are absent; origin 1989
  // (lags 1987-1989, lead 1991) survives.
  for (int origin : {1988, 1990, 1991, 1992})
    CHECK(shocks.shocks.count(origin + 2) == 0);
  CHECK(shocks.shocks.count(1989 + 2) == 1);
  CHECK(shocks.shocks.count(1987 + 2) == 1);
}

TEST_CASE("hbr passthrough scales to percentage points") {
  TransformedSeries s;
  s.country = "USA";
  s.kind = TransformKind::HallBarroRedlick;
  s.values[1990] = 0.01;
  s.values[1991] = -0.002;
  auto shocks = hbr_passthrough(s);
  CHECK(shocks.shocks.at(1990) == doctest::Approx(1.0));
  CHECK(shocks.shocks.at(1991) == doctest::Approx(-0.2));
  TransformedSeries wrong = s;
  wrong.kind = TransformKind::LevelShare;
  CHECK_THROWS_AS(hbr_passthrough(wrong), DataError);
}
