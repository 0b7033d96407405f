#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace hmlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Vertex-indexed field: one row per vertex, one column per component.
using Field = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using SparseMat = Eigen::SparseMatrix<double>;

}  // namespace hmlab
