#pragma once

#include <Eigen/Dense>

namespace fvnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Task { regression, classification };

}  // namespace fvnn
