#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace memflow {

using Index = int;

using Vec3d = Eigen::Vector3d;
using Mat3d = Eigen::Matrix3d;
using VecXd = Eigen::VectorXd;
using VecXi = Eigen::VectorXi;
using MatX3d = Eigen::MatrixX3d;
using MatX3i = Eigen::MatrixX3i;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

} // namespace memflow
