#pragma once

#include <stdexcept>

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"
#include "edgeless/matrix.hpp"
#include "edgeless/model.hpp"

namespace edgeless {

/// Inductive inference: one forward pass over the extended computation graph,
/// no parameter update. X_all rows are training nodes first, then edgeless.
inline Matrix infer_all(const ModelParams& params, const Graph& g_knn_all,
                        const AttributeMatrix& x_all) {
  return forward(params, g_knn_all, x_all);
}

/// Rows num_train..end of Z_all, order preserved.
inline Matrix select_edgeless(const Matrix& z_all, std::size_t num_train) {
  if (num_train > z_all.rows())
    throw std::invalid_argument("select_edgeless: num_train exceeds row count");
  Matrix out(z_all.rows() - num_train, z_all.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t t = 0; t < out.cols(); ++t) out(i, t) = z_all(num_train + i, t);
  return out;
}

}  // namespace edgeless
