#include "qrtebd/tensor.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qrtebd/errors.hpp"

namespace qrtebd {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i)
    os << (i ? "," : "") << shape[i];
  os << ")";
  return os.str();
}

using RowMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

ComplexTensor::ComplexTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_)) {
  for (std::size_t s : shape_)
    if (s == 0) throw ShapeError("tensor axis of dimension 0");
}

ComplexTensor::ComplexTensor(std::vector<std::size_t> shape,
                             std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t s : shape_)
    if (s == 0) throw ShapeError("tensor axis of dimension 0");
  if (shape_product(shape_) != data_.size())
    throw ShapeError("tensor data length does not match shape " +
                     shape_str(shape_));
}

ComplexTensor ComplexTensor::zeros(std::vector<std::size_t> shape) {
  return ComplexTensor(std::move(shape));
}

ComplexTensor ComplexTensor::identity(std::size_t n) {
  ComplexTensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

ComplexTensor ComplexTensor::matrix(std::size_t rows, std::size_t cols,
                                    std::vector<cplx> data) {
  return ComplexTensor({rows, cols}, std::move(data));
}

std::size_t ComplexTensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ShapeError("axis out of range");
  return shape_[axis];
}

cplx& ComplexTensor::at(std::initializer_list<std::size_t> idx) {
  return const_cast<cplx&>(std::as_const(*this).at(idx));
}

const cplx& ComplexTensor::at(std::initializer_list<std::size_t> idx) const {
  if (idx.size() != shape_.size())
    throw ShapeError("index rank mismatch for shape " + shape_str(shape_));
  std::size_t lin = 0, k = 0;
  for (std::size_t i : idx) {
    if (i >= shape_[k]) throw ShapeError("index out of range");
    lin = lin * shape_[k] + i;
    ++k;
  }
  return data_[lin];
}

ComplexTensor ComplexTensor::reshape(std::vector<std::size_t> new_shape) const& {
  if (shape_product(new_shape) != data_.size())
    throw ShapeError("reshape " + shape_str(shape_) + " -> " +
                     shape_str(new_shape) + " changes size");
  return ComplexTensor(std::move(new_shape), data_);
}

ComplexTensor ComplexTensor::reshape(std::vector<std::size_t> new_shape) && {
  if (shape_product(new_shape) != data_.size())
    throw ShapeError("reshape " + shape_str(shape_) + " -> " +
                     shape_str(new_shape) + " changes size");
  return ComplexTensor(std::move(new_shape), std::move(data_));
}

ComplexTensor ComplexTensor::transpose(
    const std::vector<std::size_t>& perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw ShapeError("permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw ShapeError("invalid axis permutation");
    seen[p] = true;
  }

  std::vector<std::size_t> new_shape(r);
  for (std::size_t k = 0; k < r; ++k) new_shape[k] = shape_[perm[k]];

  // Strides of the input, then reordered so that out_stride[k] is the input
  // stride of the axis that lands at output position k.
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t k = r; k-- > 1;) in_stride[k - 1] = in_stride[k] * shape_[k];
  std::vector<std::size_t> stride(r);
  for (std::size_t k = 0; k < r; ++k) stride[k] = in_stride[perm[k]];

  ComplexTensor out(new_shape);
  if (r == 0) {
    out.data_ = data_;
    return out;
  }

  const std::size_t inner = new_shape[r - 1];
  const std::size_t inner_stride = stride[r - 1];
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < data_.size(); dst += inner) {
    if (inner_stride == 1) {
      std::copy(data_.begin() + src, data_.begin() + src + inner,
                out.data_.begin() + dst);
    } else {
      for (std::size_t j = 0; j < inner; ++j)
        out.data_[dst + j] = data_[src + j * inner_stride];
    }
    // advance the outer counter (last axis handled by the inner loop)
    for (std::size_t k = r - 1; k-- > 0;) {
      src += stride[k];
      if (++counter[k] < new_shape[k]) break;
      src -= stride[k] * new_shape[k];
      counter[k] = 0;
    }
  }
  return out;
}

ComplexTensor ComplexTensor::conj() const {
  ComplexTensor out(shape_, data_);
  for (cplx& v : out.data_) v = std::conj(v);
  return out;
}

double ComplexTensor::norm() const {
  double s = 0;
  for (const cplx& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

bool ComplexTensor::all_finite() const {
  for (const cplx& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

ComplexTensor& ComplexTensor::operator*=(cplx factor) {
  for (cplx& v : data_) v *= factor;
  return *this;
}

ComplexTensor contract(
    const ComplexTensor& a, const ComplexTensor& b,
    const std::vector<std::pair<std::size_t, std::size_t>>& axes) {
  const std::size_t ra = a.rank(), rb = b.rank();
  std::vector<bool> ca(ra, false), cb(rb, false);
  std::size_t contracted_size = 1;
  for (const auto& [ia, ib] : axes) {
    if (ia >= ra || ib >= rb) throw ShapeError("contraction axis out of range");
    if (ca[ia] || cb[ib]) throw ShapeError("axis contracted twice");
    if (a.dim(ia) != b.dim(ib))
      throw ShapeError("contracted axes have unequal dimensions");
    ca[ia] = true;
    cb[ib] = true;
    contracted_size *= a.dim(ia);
  }

  // Move contracted axes of a to the back and of b to the front, in the
  // order given, then it is a single matrix product.
  std::vector<std::size_t> perm_a, perm_b;
  std::vector<std::size_t> out_shape;
  for (std::size_t k = 0; k < ra; ++k)
    if (!ca[k]) {
      perm_a.push_back(k);
      out_shape.push_back(a.dim(k));
    }
  for (const auto& [ia, ib] : axes) {
    perm_a.push_back(ia);
    perm_b.push_back(ib);
  }
  for (std::size_t k = 0; k < rb; ++k)
    if (!cb[k]) {
      perm_b.push_back(k);
      out_shape.push_back(b.dim(k));
    }

  // skip the permutation copy when the axes are already in place
  const auto is_identity = [](const std::vector<std::size_t>& p) {
    for (std::size_t k = 0; k < p.size(); ++k)
      if (p[k] != k) return false;
    return true;
  };
  ComplexTensor at_store, bt_store;
  const ComplexTensor* at = &a;
  const ComplexTensor* bt = &b;
  if (!is_identity(perm_a)) {
    at_store = a.transpose(perm_a);
    at = &at_store;
  }
  if (!is_identity(perm_b)) {
    bt_store = b.transpose(perm_b);
    bt = &bt_store;
  }
  const std::size_t m = a.size() / contracted_size;
  const std::size_t n = b.size() / contracted_size;

  ComplexTensor out(out_shape);
  Eigen::Map<const RowMat> ma(at->data().data(), m, contracted_size);
  Eigen::Map<const RowMat> mb(bt->data().data(), contracted_size, n);
  Eigen::Map<RowMat> mo(out.data().data(), m, n);
  mo.noalias() = ma * mb;
  return out;
}

}  // namespace qrtebd
