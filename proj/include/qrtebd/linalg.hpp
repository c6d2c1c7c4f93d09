#ifndef QRTEBD_LINALG_HPP
#define QRTEBD_LINALG_HPP

#include <vector>

#include "qrtebd/tensor.hpp"

namespace qrtebd {

// Matrix factorizations on rank-2 tensors. All of them are deterministic:
// QR/LQ are gauge-fixed to a real non-negative diagonal of the triangular
// factor, SVD singular values come out descending, and eigh re-sorts the
// eigenpairs descending.

struct QrResult {
  ComplexTensor q;  // p x k, orthonormal columns
  ComplexTensor r;  // k x q, upper triangular, diag real >= 0
};

struct LqResult {
  ComplexTensor l;  // p x k, lower triangular, diag real >= 0
  ComplexTensor q;  // k x q, orthonormal rows
};

struct SvdResult {
  ComplexTensor u;        // p x k
  std::vector<double> s;  // k, descending, >= 0
  ComplexTensor vdag;     // k x q
};

struct EighResult {
  std::vector<double> w;  // descending
  ComplexTensor v;        // columns are the matching eigenvectors
};

QrResult qr_reduced(const ComplexTensor& m);
LqResult lq_reduced(const ComplexTensor& m);
SvdResult svd(const ComplexTensor& m);

/// h must be hermitian within 1e-10 relative Frobenius norm; it is
/// symmetrized before factorization.
EighResult eigh(const ComplexTensor& h);

/// exp(-i t h) for hermitian h, via the spectral decomposition.
ComplexTensor expm_hermitian(const ComplexTensor& h, double t);

}  // namespace qrtebd

#endif
