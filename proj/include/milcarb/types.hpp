#pragma once

#include <Eigen/Dense>

namespace milcarb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace milcarb
