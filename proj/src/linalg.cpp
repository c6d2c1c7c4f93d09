#include "qrtebd/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "eigen_bridge.hpp"
#include "qrtebd/errors.hpp"

namespace qrtebd {

using detail::ColMat;
using detail::to_eigen;
using detail::to_tensor;

namespace {

void require_finite_matrix(const ComplexTensor& m, const char* op) {
  if (m.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix");
  if (!m.all_finite())
    throw InputError(std::string(op) + ": non-finite entries");
}

// Fix the QR gauge: rotate column phases of Q so the diagonal of R becomes
// real and non-negative. Makes the factorization deterministic.
void fix_qr_gauge(ColMat& q, ColMat& r) {
  const Eigen::Index k = r.rows();
  for (Eigen::Index i = 0; i < k; ++i) {
    const cplx d = r(i, i);
    const double a = std::abs(d);
    if (a == 0.0) continue;
    const cplx phase = d / a;
    q.col(i) *= phase;
    r.row(i) *= std::conj(phase);
    r(i, i) = a;  // kill the rounding residue in the imaginary part
  }
}

}  // namespace

QrResult qr_reduced(const ComplexTensor& m) {
  require_finite_matrix(m, "qr_reduced");
  const ColMat a = to_eigen(m);
  const Eigen::Index p = a.rows(), q = a.cols();
  const Eigen::Index k = std::min(p, q);

  Eigen::HouseholderQR<ColMat> qr(a);
  ColMat qm = qr.householderQ() * ColMat::Identity(p, k);
  ColMat rm = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  fix_qr_gauge(qm, rm);
  return {to_tensor(qm), to_tensor(rm)};
}

LqResult lq_reduced(const ComplexTensor& m) {
  require_finite_matrix(m, "lq_reduced");
  // m = L Q  <=>  m^dag = Q^dag L^dag, so reuse QR on the adjoint.
  const ColMat a = to_eigen(m).adjoint();
  const Eigen::Index k = std::min(a.rows(), a.cols());

  Eigen::HouseholderQR<ColMat> qr(a);
  ColMat qm = qr.householderQ() * ColMat::Identity(a.rows(), k);
  ColMat rm = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  fix_qr_gauge(qm, rm);
  return {to_tensor(rm.adjoint()), to_tensor(qm.adjoint())};
}

SvdResult svd(const ComplexTensor& m) {
  require_finite_matrix(m, "svd");
  const ColMat a = to_eigen(m);
  Eigen::BDCSVD<ColMat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success)
    throw NumericError("svd: factorization did not converge");

  const auto& sv = dec.singularValues();
  std::vector<double> s(sv.data(), sv.data() + sv.size());
  return {to_tensor(dec.matrixU()), std::move(s),
          to_tensor(dec.matrixV().adjoint())};
}

EighResult eigh(const ComplexTensor& h) {
  require_finite_matrix(h, "eigh");
  if (h.dim(0) != h.dim(1)) throw ShapeError("eigh: matrix not square");
  const ColMat a = to_eigen(h);
  const double defect = (a - a.adjoint()).norm();
  if (defect > 1e-10 * std::max(a.norm(), 1e-300))
    throw InputError("eigh: matrix not hermitian within tolerance");

  const ColMat sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ColMat> es(sym);
  if (es.info() != Eigen::Success)
    throw NumericError("eigh: factorization did not converge");

  // Eigen returns ascending order; the callers consume descending.
  const Eigen::Index n = sym.rows();
  std::vector<double> w(n);
  ColMat v(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = es.eigenvalues()(n - 1 - i);
    v.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return {std::move(w), to_tensor(v)};
}

ComplexTensor expm_hermitian(const ComplexTensor& h, double t) {
  const EighResult eg = eigh(h);
  const ColMat v = to_eigen(eg.v);
  Eigen::VectorXcd phases(v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i)
    phases(i) = std::exp(cplx(0.0, -t * eg.w[i]));
  return to_tensor(ColMat(v * phases.asDiagonal() * v.adjoint()));
}

}  // namespace qrtebd
