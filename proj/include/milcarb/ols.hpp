#pragma once

#include "milcarb/types.hpp"

namespace milcarb {

struct OlsFit {
  Vec coefficients;
  Vec residuals;  // aligned to input rows
  Vec fitted;
  int n_obs = 0;
};

// Least squares of y on X via column-pivoted QR. Throws DataError on
// rank-deficient X or when rows(X) <= cols(X).
OlsFit ols(const Vec& y, const Mat& X);

// Inverse standard normal CDF (Acklam's rational approximation, refined by
// one Halley step; accurate to ~1e-15 over (0,1)).
double normal_quantile(double p);

}  // namespace milcarb
