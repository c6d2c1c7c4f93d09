#ifndef QRTEBD_SRC_EIGEN_BRIDGE_HPP
#define QRTEBD_SRC_EIGEN_BRIDGE_HPP

// Internal glue between ComplexTensor (row-major flat storage) and Eigen.
// Not installed; implementation files only.

#include <Eigen/Dense>

#include "qrtebd/errors.hpp"
#include "qrtebd/tensor.hpp"

namespace qrtebd::detail {

using RowMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXcd;

inline Eigen::Map<const RowMat> mat_view(const ComplexTensor& t) {
  if (t.rank() != 2) throw ShapeError("expected a rank-2 tensor");
  return {t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
          static_cast<Eigen::Index>(t.dim(1))};
}

inline Eigen::Map<RowMat> mat_view(ComplexTensor& t) {
  if (t.rank() != 2) throw ShapeError("expected a rank-2 tensor");
  return {t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
          static_cast<Eigen::Index>(t.dim(1))};
}

template <typename Derived>
ComplexTensor to_tensor(const Eigen::MatrixBase<Derived>& m) {
  ComplexTensor out({static_cast<std::size_t>(m.rows()),
                     static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMat>(out.data().data(), m.rows(), m.cols()) = m;
  return out;
}

inline ColMat to_eigen(const ComplexTensor& t) { return mat_view(t); }

}  // namespace qrtebd::detail

#endif
