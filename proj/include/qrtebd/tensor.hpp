#ifndef QRTEBD_TENSOR_HPP
#define QRTEBD_TENSOR_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace qrtebd {

using cplx = std::complex<double>;

/// Dense tensor of complex doubles with an arbitrary number of axes.
/// Entries are stored row-major (last axis fastest). Values are immutable
/// in spirit: all operations return new tensors, so sharing across threads
/// is safe once constructed.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(std::vector<std::size_t> shape);
  ComplexTensor(std::vector<std::size_t> shape, std::vector<cplx> data);

  static ComplexTensor zeros(std::vector<std::size_t> shape);
  static ComplexTensor identity(std::size_t n);
  /// Rank-2 tensor from a row-major flat buffer.
  static ComplexTensor matrix(std::size_t rows, std::size_t cols,
                              std::vector<cplx> data);

  std::size_t rank() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }

  cplx& at(std::initializer_list<std::size_t> idx);
  const cplx& at(std::initializer_list<std::size_t> idx) const;

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  /// Same entries, new shape; total size must match. The rvalue overload
  /// reuses the buffer instead of copying.
  ComplexTensor reshape(std::vector<std::size_t> new_shape) const&;
  ComplexTensor reshape(std::vector<std::size_t> new_shape) &&;
  /// Axis permutation: result axis k is input axis perm[k].
  ComplexTensor transpose(const std::vector<std::size_t>& perm) const;
  ComplexTensor conj() const;

  double norm() const;            // Frobenius
  bool all_finite() const;

  ComplexTensor& operator*=(cplx factor);
  friend ComplexTensor operator*(cplx factor, ComplexTensor t) {
    t *= factor;
    return t;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<cplx> data_;
};

/// Pairwise tensor contraction. `axes` lists (axis of a, axis of b) pairs to
/// sum over; the result carries the remaining axes of a (in order) followed
/// by the remaining axes of b. An empty list yields the outer product.
ComplexTensor contract(const ComplexTensor& a, const ComplexTensor& b,
                       const std::vector<std::pair<std::size_t, std::size_t>>& axes);

}  // namespace qrtebd

#endif
