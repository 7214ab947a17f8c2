#pragma once

#include <Eigen/Dense>

namespace jvg {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Unary potentials: one row per scene-graph node, one column per region.
// Each row is a probability distribution over regions.
using UnaryTable = Mat;

// Binary potential of one edge: entry (i, j) is the compatibility of
// (subject = region i, object = region j). The whole table sums to 1.
using BinaryTable = Mat;

}  // namespace jvg
