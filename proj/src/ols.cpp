#include "milcarb/ols.hpp"

#include <cmath>
#include <sstream>

#include "milcarb/errors.hpp"

namespace milcarb {

OlsFit ols(const Vec& y, const Mat& X) {
  if (X.rows() != y.size()) throw DataError("ols: rows(X) != len(y)");
  if (X.rows() <= X.cols()) {
    std::ostringstream os;
    os << "ols: insufficient observations (" << X.rows() << " rows, "
       << X.cols() << " regressors)";
    throw DataError(os.str());
  }
  Eigen::ColPivHouseholderQR<Mat> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    std::ostringstream os;
    os << "ols: rank-deficient design (rank " << qr.rank() << " of "
       << X.cols() << " columns)";
    throw DataError(os.str());
  }
  OlsFit fit;
  fit.coefficients = qr.solve(y);
  fit.fitted = X * fit.coefficients;
  fit.residuals = y - fit.fitted;
  fit.n_obs = static_cast<int>(X.rows());
  return fit;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DataError("normal_quantile: p outside (0,1)");

  // Acklam's approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // One Halley refinement against the exact CDF.
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  x = x - u / (1 + x * u / 2);
  return x;
}

}  // namespace milcarb
