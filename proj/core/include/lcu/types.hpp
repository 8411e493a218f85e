#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace lcu {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

}  // namespace lcu
