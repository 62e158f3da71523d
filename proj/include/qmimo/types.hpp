#pragma once

#include <complex>
#include <Eigen/Dense>

namespace qmimo {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

constexpr Complex kImag{0.0, 1.0};

}  // namespace qmimo
