#include "qrtebd/linalg.hpp"

#include <gtest/gtest.h>
#include <numbers>

#include "qrtebd/errors.hpp"
#include "test_util.hpp"

using namespace qrtebd;
using qrtebd::testing::matmul;
using qrtebd::testing::max_abs_diff;
using qrtebd::testing::random_hermitian;
using qrtebd::testing::random_tensor;
using qrtebd::testing::rel_fro_error;

namespace {

ComplexTensor diag_from(const std::vector<double>& v) {
  ComplexTensor t({v.size(), v.size()});
  for (std::size_t i = 0; i < v.size(); ++i) t.at({i, i}) = v[i];
  return t;
}

double gram_defect_cols(const ComplexTensor& q) {
  // || q^dag q - 1 ||_max
  const ComplexTensor g = contract(q.conj(), q, {{0, 0}});
  double m = 0;
  for (std::size_t i = 0; i < g.dim(0); ++i)
    for (std::size_t j = 0; j < g.dim(1); ++j)
      m = std::max(m, std::abs(g.at({i, j}) - (i == j ? cplx(1.0) : cplx(0.0))));
  return m;
}

double gram_defect_rows(const ComplexTensor& q) {
  const ComplexTensor g = contract(q, q.conj(), {{1, 1}});
  double m = 0;
  for (std::size_t i = 0; i < g.dim(0); ++i)
    for (std::size_t j = 0; j < g.dim(1); ++j)
      m = std::max(m, std::abs(g.at({i, j}) - (i == j ? cplx(1.0) : cplx(0.0))));
  return m;
}

}  // namespace

TEST(Qr, Identity) {
  const QrResult qr = qr_reduced(ComplexTensor::identity(3));
  EXPECT_LT(max_abs_diff(qr.q, ComplexTensor::identity(3)), 1e-14);
  EXPECT_LT(max_abs_diff(qr.r, ComplexTensor::identity(3)), 1e-14);
}

TEST(Qr, SingleColumnGaugeFixed) {
  const ComplexTensor m({2, 1}, {cplx(3.0), cplx(4.0)});
  const QrResult qr = qr_reduced(m);
  EXPECT_NEAR(qr.q.at({0, 0}).real(), 0.6, 1e-14);
  EXPECT_NEAR(qr.q.at({1, 0}).real(), 0.8, 1e-14);
  EXPECT_NEAR(qr.r.at({0, 0}).real(), 5.0, 1e-14);
  EXPECT_NEAR(qr.r.at({0, 0}).imag(), 0.0, 0.0);
}

TEST(Qr, RandomReconstructionAndOrthonormality) {
  const ComplexTensor m = random_tensor({6, 4}, 101);
  const QrResult qr = qr_reduced(m);
  EXPECT_LT(rel_fro_error(m, matmul(qr.q, qr.r)), 1e-12);
  EXPECT_LT(gram_defect_cols(qr.q), 1e-12);
  // gauge: real non-negative diagonal of R
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(qr.r.at({i, i}).real(), 0.0);
    EXPECT_EQ(qr.r.at({i, i}).imag(), 0.0);
  }
}

TEST(Qr, DeterministicForIdenticalInput) {
  const ComplexTensor m = random_tensor({8, 5}, 102);
  const QrResult a = qr_reduced(m);
  const QrResult b = qr_reduced(m);
  EXPECT_EQ(max_abs_diff(a.q, b.q), 0.0);
  EXPECT_EQ(max_abs_diff(a.r, b.r), 0.0);
}

TEST(Qr, NonFiniteInputThrows) {
  ComplexTensor m = random_tensor({3, 3}, 103);
  m.at({1, 2}) = cplx(std::numeric_limits<double>::infinity(), 0.0);
  EXPECT_THROW(qr_reduced(m), InputError);
}

TEST(Lq, Identity) {
  const LqResult lq = lq_reduced(ComplexTensor::identity(2));
  EXPECT_LT(max_abs_diff(lq.l, ComplexTensor::identity(2)), 1e-14);
  EXPECT_LT(max_abs_diff(lq.q, ComplexTensor::identity(2)), 1e-14);
}

TEST(Lq, DualOfQrOnAdjoint) {
  const ComplexTensor m = random_tensor({4, 6}, 111);
  const LqResult lq = lq_reduced(m);
  ComplexTensor mdag = m.conj().transpose({1, 0});
  const QrResult qr = qr_reduced(mdag);
  EXPECT_LT(max_abs_diff(lq.l, qr.r.conj().transpose({1, 0})), 1e-13);
  EXPECT_LT(max_abs_diff(lq.q, qr.q.conj().transpose({1, 0})), 1e-13);
}

TEST(Lq, RandomRowsOrthonormal) {
  const ComplexTensor m = random_tensor({4, 6}, 112);
  const LqResult lq = lq_reduced(m);
  EXPECT_LT(rel_fro_error(m, matmul(lq.l, lq.q)), 1e-12);
  EXPECT_LT(gram_defect_rows(lq.q), 1e-12);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(lq.l.at({i, i}).real(), 0.0);
    EXPECT_EQ(lq.l.at({i, i}).imag(), 0.0);
    for (std::size_t j = i + 1; j < 4; ++j)
      EXPECT_EQ(lq.l.at({i, j}), cplx(0.0));  // lower triangular
  }
}

TEST(Svd, DiagonalSortedDescending) {
  const SvdResult dec = svd(diag_from({1.0, 3.0, 2.0}));
  ASSERT_EQ(dec.s.size(), 3u);
  EXPECT_NEAR(dec.s[0], 3.0, 1e-14);
  EXPECT_NEAR(dec.s[1], 2.0, 1e-14);
  EXPECT_NEAR(dec.s[2], 1.0, 1e-14);
}

TEST(Svd, ZeroMatrix) {
  const SvdResult dec = svd(ComplexTensor({3, 3}));
  for (double s : dec.s) EXPECT_EQ(s, 0.0);
}

TEST(Svd, SingularValuesMatchGramEigenvalues) {
  const ComplexTensor m = random_tensor({5, 3}, 121);
  const SvdResult dec = svd(m);
  const ComplexTensor gram = contract(m.conj(), m, {{0, 0}});
  const EighResult eg = eigh(gram);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(dec.s[i], std::sqrt(std::max(eg.w[i], 0.0)), 1e-10);
}

TEST(Svd, GramAgreementAt64) {
  const ComplexTensor m = random_tensor({64, 64}, 123);
  const SvdResult dec = svd(m);
  const EighResult eg = eigh(contract(m.conj(), m, {{0, 0}}));
  for (std::size_t i = 0; i < 64; ++i)
    EXPECT_NEAR(dec.s[i], std::sqrt(std::max(eg.w[i], 0.0)), 1e-10);
}

TEST(Svd, ReconstructionAndIsometry) {
  const ComplexTensor m = random_tensor({5, 3}, 122);
  const SvdResult dec = svd(m);
  const ComplexTensor smat = diag_from(dec.s);
  EXPECT_LT(rel_fro_error(m, matmul(dec.u, matmul(smat, dec.vdag))), 1e-12);
  EXPECT_LT(gram_defect_cols(dec.u), 1e-12);
  EXPECT_LT(gram_defect_rows(dec.vdag), 1e-12);
}

TEST(Eigh, DiagonalDescendingWithPermutedIdentity) {
  const EighResult eg = eigh(diag_from({2.0, 5.0}));
  EXPECT_NEAR(eg.w[0], 5.0, 1e-14);
  EXPECT_NEAR(eg.w[1], 2.0, 1e-14);
  // columns are e_2, e_1 up to phase
  EXPECT_NEAR(std::abs(eg.v.at({1, 0})), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(eg.v.at({0, 1})), 1.0, 1e-14);
}

TEST(Eigh, PauliXSpectrum) {
  const ComplexTensor sx({2, 2}, {cplx(0.0), cplx(1.0), cplx(1.0), cplx(0.0)});
  const EighResult eg = eigh(sx);
  EXPECT_NEAR(eg.w[0], 1.0, 1e-14);
  EXPECT_NEAR(eg.w[1], -1.0, 1e-14);
}

TEST(Eigh, RandomHermitianReconstruction) {
  const ComplexTensor h = random_hermitian(8, 131);
  const EighResult eg = eigh(h);
  ComplexTensor wv({8, 8});
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      wv.at({i, j}) = eg.v.at({i, j}) * eg.w[j];
  const ComplexTensor rebuilt = contract(wv, eg.v.conj(), {{1, 1}});
  EXPECT_LT(rel_fro_error(h, rebuilt), 1e-10);
}

TEST(Eigh, NonHermitianThrows) {
  ComplexTensor m = random_tensor({4, 4}, 132);
  EXPECT_THROW(eigh(m), InputError);
}

TEST(Expm, ZeroTimeIsIdentity) {
  const ComplexTensor h = random_hermitian(4, 141);
  EXPECT_LT(max_abs_diff(expm_hermitian(h, 0.0), ComplexTensor::identity(4)),
            1e-13);
}

TEST(Expm, PauliZAnalytic) {
  const ComplexTensor sz({2, 2}, {cplx(1.0), cplx(0.0), cplx(0.0), cplx(-1.0)});
  const ComplexTensor u = expm_hermitian(sz, std::numbers::pi / 2);
  EXPECT_LT(std::abs(u.at({0, 0}) - cplx(0.0, -1.0)), 1e-14);
  EXPECT_LT(std::abs(u.at({1, 1}) - cplx(0.0, 1.0)), 1e-14);
  EXPECT_LT(std::abs(u.at({0, 1})), 1e-14);
  EXPECT_LT(std::abs(u.at({1, 0})), 1e-14);
}

TEST(Expm, MatchesTruncatedTaylorSeries) {
  const ComplexTensor h = random_hermitian(4, 142);
  const double t = 0.05;
  const ComplexTensor u = expm_hermitian(h, t);

  // 20-term series of exp(-i t h)
  ComplexTensor series = ComplexTensor::identity(4);
  ComplexTensor term = ComplexTensor::identity(4);
  for (int k = 1; k <= 20; ++k) {
    term = matmul(term, h);
    term *= cplx(0.0, -t) * (1.0 / k);
    for (std::size_t idx = 0; idx < series.data().size(); ++idx)
      series.data()[idx] += term.data()[idx];
  }
  EXPECT_LT(max_abs_diff(u, series), 1e-12);
}

TEST(Expm, OutputUnitary) {
  const ComplexTensor h = random_hermitian(6, 143);
  const ComplexTensor u = expm_hermitian(h, 0.3);
  EXPECT_LT(gram_defect_cols(u), 1e-12);
}

// reconstruction up to dimension 2048, per factorization op
TEST(LinalgLarge, ReconstructionAtDimension2048) {
  const ComplexTensor tall = random_tensor({2048, 128}, 151);
  const QrResult qr = qr_reduced(tall);
  EXPECT_LT(rel_fro_error(tall, matmul(qr.q, qr.r)), 1e-12);

  const ComplexTensor wide = random_tensor({128, 2048}, 152);
  const LqResult lq = lq_reduced(wide);
  EXPECT_LT(rel_fro_error(wide, matmul(lq.l, lq.q)), 1e-12);

  const SvdResult dec = svd(tall);
  ComplexTensor smat({128, 128});
  for (std::size_t i = 0; i < 128; ++i) smat.at({i, i}) = dec.s[i];
  EXPECT_LT(rel_fro_error(tall, matmul(dec.u, matmul(smat, dec.vdag))), 1e-12);
}

TEST(LinalgLarge, EighReconstructionAtDimension2048) {
  const std::size_t n = 2048;
  const ComplexTensor h = random_hermitian(n, 153);
  const EighResult eg = eigh(h);
  ComplexTensor wv({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      wv.at({i, j}) = eg.v.at({i, j}) * eg.w[j];
  const ComplexTensor rebuilt = contract(wv, eg.v.conj(), {{1, 1}});
  EXPECT_LT(rel_fro_error(h, rebuilt), 1e-12);
}
