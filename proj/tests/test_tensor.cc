#include "qrtebd/tensor.hpp"

#include <algorithm>
#include <gtest/gtest.h>

#include "qrtebd/errors.hpp"
#include "test_util.hpp"

using namespace qrtebd;
using qrtebd::testing::max_abs_diff;
using qrtebd::testing::random_tensor;

TEST(Tensor, IdentityContraction) {
  const ComplexTensor id = ComplexTensor::identity(2);
  const ComplexTensor v({2}, {cplx(3.0, 0.0), cplx(0.0, 4.0)});
  const ComplexTensor out = contract(id, v, {{1, 0}});
  ASSERT_EQ(out.shape(), std::vector<std::size_t>({2}));
  EXPECT_EQ(out.at({0}), cplx(3.0, 0.0));
  EXPECT_EQ(out.at({1}), cplx(0.0, 4.0));
}

TEST(Tensor, OuterProductOfBasisVectors) {
  const ComplexTensor u({2}, {cplx(1.0), cplx(0.0)});
  const ComplexTensor v({2}, {cplx(0.0), cplx(1.0)});
  const ComplexTensor out = contract(u, v, {});
  ASSERT_EQ(out.shape(), std::vector<std::size_t>({2, 2}));
  EXPECT_EQ(out.at({0, 0}), cplx(0.0));
  EXPECT_EQ(out.at({0, 1}), cplx(1.0));
  EXPECT_EQ(out.at({1, 0}), cplx(0.0));
  EXPECT_EQ(out.at({1, 1}), cplx(0.0));
}

TEST(Tensor, MatrixProductMatchesTripleLoopOracle) {
  const ComplexTensor a = random_tensor({3, 4}, 11);
  const ComplexTensor b = random_tensor({4, 2}, 12);
  const ComplexTensor out = contract(a, b, {{1, 0}});

  ComplexTensor expect({3, 2});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 4; ++k)
        expect.at({i, j}) += a.at({i, k}) * b.at({k, j});
  EXPECT_LT(max_abs_diff(out, expect), 1e-14);
}

TEST(Tensor, MultiAxisContractionMatchesLoopOracle) {
  const ComplexTensor a = random_tensor({2, 3, 4}, 21);
  const ComplexTensor b = random_tensor({4, 2, 5}, 22);
  // contract a's axes (0, 2) against b's axes (1, 0)
  const ComplexTensor out = contract(a, b, {{0, 1}, {2, 0}});
  ASSERT_EQ(out.shape(), std::vector<std::size_t>({3, 5}));

  ComplexTensor expect({3, 5});
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t m = 0; m < 5; ++m)
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 4; ++k)
          expect.at({j, m}) += a.at({i, j, k}) * b.at({k, i, m});
  EXPECT_LT(max_abs_diff(out, expect), 1e-13);
}

TEST(Tensor, ContractionShapeMismatchThrows) {
  const ComplexTensor a = random_tensor({3, 4}, 1);
  const ComplexTensor b = random_tensor({3, 2}, 2);
  EXPECT_THROW(contract(a, b, {{1, 0}}), ShapeError);
}

TEST(Tensor, ReshapeAndTransposePreserveEntries) {
  const ComplexTensor t = random_tensor({2, 3, 4}, 31);
  auto sorted_entries = [](const ComplexTensor& x) {
    std::vector<std::pair<double, double>> v;
    for (const cplx& c : x.data()) v.emplace_back(c.real(), c.imag());
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto base = sorted_entries(t);
  EXPECT_EQ(sorted_entries(t.reshape({4, 6})), base);
  EXPECT_EQ(sorted_entries(t.transpose({2, 0, 1})), base);
}

TEST(Tensor, TransposeMovesEntriesCorrectly) {
  const ComplexTensor t = random_tensor({2, 3, 4}, 32);
  const ComplexTensor p = t.transpose({2, 0, 1});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k)
        EXPECT_EQ(p.at({k, i, j}), t.at({i, j, k}));
}

TEST(Tensor, TransposeInverseRoundTrip) {
  const ComplexTensor t = random_tensor({3, 4, 2, 5}, 33);
  const ComplexTensor p = t.transpose({3, 1, 0, 2});
  // inverse permutation of (3,1,0,2) is (2,1,3,0)
  EXPECT_EQ(max_abs_diff(p.transpose({2, 1, 3, 0}), t), 0.0);
}

TEST(Tensor, ReshapeSizeMismatchThrows) {
  const ComplexTensor t = random_tensor({2, 3}, 3);
  EXPECT_THROW(t.reshape({4, 2}), ShapeError);
}

TEST(Tensor, ShapeDataMismatchThrows) {
  EXPECT_THROW(ComplexTensor({2, 2}, std::vector<cplx>(3)), ShapeError);
}

TEST(Tensor, FullContractionYieldsScalar) {
  const ComplexTensor a = random_tensor({3, 4}, 41);
  const ComplexTensor out = contract(a, a.conj(), {{0, 0}, {1, 1}});
  ASSERT_EQ(out.rank(), 0u);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out.data()[0].real(), a.norm() * a.norm(), 1e-12 * a.norm() * a.norm());
  EXPECT_NEAR(out.data()[0].imag(), 0.0, 1e-12);
}
