#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "advbench/dct.hpp"
#include "advbench/rng.hpp"
#include "advbench/tensor.hpp"
#include "advbench/tensor_io.hpp"

using namespace advbench;

TEST(Clip, BoundaryForcing) {
  Tensor t = Tensor::vector({-0.1, 0.5, 1.2});
  Tensor c = clip(t, 0.0, 1.0);
  EXPECT_EQ(c[0], 0.0);
  EXPECT_EQ(c[1], 0.5);
  EXPECT_EQ(c[2], 1.0);
}

TEST(Clip, IdentityInsideRange) {
  SplitMix64 rng(1);
  Tensor t({64});
  for (double& v : t.values()) v = rng.next_double();
  Tensor c = clip(t, 0.0, 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(c[i], t[i]);
}

TEST(Clip, IdempotentAndMonotone) {
  SplitMix64 rng(2);
  Tensor a({128}), b({128});
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.uniform(-2.0, 2.0);
    b[i] = a[i] + rng.uniform(0.0, 1.0);  // b >= a elementwise
  }
  Tensor ca = clip(a, 0.0, 1.0);
  Tensor cca = clip(ca, 0.0, 1.0);
  Tensor cb = clip(b, 0.0, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(ca[i], cca[i]);
    EXPECT_LE(ca[i], cb[i]);
  }
}

TEST(Clip, RejectsInvertedBounds) {
  EXPECT_THROW(clip(Tensor::vector({0.0}), 1.0, 0.0), std::invalid_argument);
}

TEST(Norm, PythagoreanPair) {
  EXPECT_DOUBLE_EQ(norm(Tensor::vector({3.0, 4.0}), NormKind::L2), 5.0);
}

TEST(Norm, MaxNorm) {
  EXPECT_DOUBLE_EQ(norm(Tensor::vector({-2.0, 1.0}), NormKind::LInf), 2.0);
}

TEST(Norm, Zeros) {
  Tensor z({16});
  EXPECT_EQ(norm(z, NormKind::L1), 0.0);
  EXPECT_EQ(norm(z, NormKind::L2), 0.0);
  EXPECT_EQ(norm(z, NormKind::LInf), 0.0);
}

TEST(Norm, UnsupportedOrderRejected) {
  EXPECT_THROW(parse_norm("3"), std::invalid_argument);
  EXPECT_THROW(parse_norm("fro"), std::invalid_argument);
  EXPECT_EQ(parse_norm("inf"), NormKind::LInf);
  EXPECT_EQ(parse_norm("1"), NormKind::L1);
  EXPECT_EQ(parse_norm("2"), NormKind::L2);
}

TEST(Dct2, AllOnesConcentratesAtDc) {
  Tensor ones({4, 4});
  for (double& v : ones.values()) v = 1.0;
  Tensor freq = dct2(ones);
  EXPECT_NEAR(freq.at(0, 0), 4.0, 1e-12);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != 0 || j != 0) EXPECT_LT(std::fabs(freq.at(i, j)), 1e-12);
}

TEST(Dct2, InverseRoundTrip) {
  SplitMix64 rng(7);
  Tensor x({8, 8});
  for (double& v : x.values()) v = rng.next_double();
  Tensor back = idct2(dct2(x));
  EXPECT_LT(max_abs_diff(back, x), 1e-10);
}

TEST(Dct2, ParsevalEquality) {
  SplitMix64 rng(8);
  Tensor x({8, 8});
  for (double& v : x.values()) v = rng.uniform(-1.0, 1.0);
  EXPECT_NEAR(norm(dct2(x), NormKind::L2), norm(x, NormKind::L2), 1e-10);
}

TEST(Dct2, RejectsNon2d) {
  EXPECT_THROW(dct2(Tensor::vector({1.0, 2.0})), std::invalid_argument);
  EXPECT_THROW(idct2(Tensor({2, 2, 2})), std::invalid_argument);
}

TEST(Dct2, BasisAtomMatchesInverseOfOneHot) {
  for (auto [ki, kj] : {std::pair<std::size_t, std::size_t>{0, 0}, {1, 3}, {5, 2}}) {
    Tensor onehot({7, 9});
    onehot.at(ki, kj) = 1.0;
    Tensor expected = idct2(onehot);
    Tensor atom = dct2_basis_atom(7, 9, ki, kj);
    EXPECT_LT(max_abs_diff(atom, expected), 1e-12);
  }
}

// Reference stream for seed 42, computed from the splitmix64 definition
// independently of this implementation.
TEST(Rng, MatchesReferenceStream) {
  SplitMix64 rng(42);
  const std::uint64_t expected[] = {
      0xbdd732262feb6e95ULL, 0x28efe333b266f103ULL, 0x47526757130f9f52ULL,
      0x581ce1ff0e4ae394ULL, 0x09bc585a244823f2ULL, 0xde4431fa3c80db06ULL,
  };
  for (std::uint64_t e : expected) EXPECT_EQ(rng.next_u64(), e);
}

TEST(Rng, IdenticalSeedIdenticalStream) {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, ForkedStreamsDiffer) {
  SplitMix64 root(42);
  SplitMix64 a = root.fork(0), b = root.fork(1);
  bool any_diff = false;
  for (int i = 0; i < 16; ++i) any_diff |= a.next_u64() != b.next_u64();
  EXPECT_TRUE(any_diff);
  // Forking does not advance the parent.
  SplitMix64 c(42);
  EXPECT_EQ(root.next_u64(), c.next_u64());
}

TEST(Rng, DoublesInUnitInterval) {
  SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    double v = rng.next_double();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Rng, PermutationIsValid) {
  SplitMix64 rng(4);
  auto perm = rng.permutation(100);
  std::vector<bool> seen(100, false);
  for (std::size_t idx : perm) {
    ASSERT_LT(idx, 100u);
    EXPECT_FALSE(seen[idx]);
    seen[idx] = true;
  }
}

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST(TensorIo, RoundTripPreservesShapeAndValues) {
  Tensor t({2, 3}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  std::string path = temp_path("advbench_roundtrip.atns");
  tensor_save(t, path);
  Tensor back = tensor_load(path);
  ASSERT_EQ(back.shape(), t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(back[i], t[i], 1e-6);
}

TEST(TensorIo, QuantizationBoundForUnitRange) {
  SplitMix64 rng(5);
  Tensor t({4096});
  for (double& v : t.values()) v = rng.next_double();
  std::string path = temp_path("advbench_quant.atns");
  tensor_save(t, path);
  Tensor back = tensor_load(path);
  EXPECT_LE(max_abs_diff(back, t), std::pow(2.0, -20.0));
  // And the load equals the in-memory quantization helper exactly.
  EXPECT_EQ(back.values(), quantize_f32(t).values());
}

TEST(TensorIo, WrongMagicIsFormatError) {
  std::string path = temp_path("advbench_badmagic.atns");
  std::ofstream out(path, std::ios::binary);
  out << "BOGUS data that is long enough to not look truncated";
  out.close();
  EXPECT_THROW(tensor_load(path), FormatError);
}

TEST(TensorIo, TruncatedFileReportsOffset) {
  Tensor t({3, 3});
  std::string bytes = tensor_to_bytes(t);
  std::string truncated = bytes.substr(0, bytes.size() - 5);
  try {
    tensor_from_bytes(truncated);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_GT(e.offset(), 0u);
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
}

TEST(TensorIo, EmptyShapeRejectedOnSave) {
  Tensor empty;
  EXPECT_THROW(tensor_to_bytes(empty), std::invalid_argument);
}

TEST(TensorIo, ZeroDimensionRejectedOnConstruction) {
  EXPECT_THROW(Tensor({2, 0}), std::invalid_argument);
}

TEST(TensorIo, TrailingBytesRejected) {
  Tensor t({2});
  std::string bytes = tensor_to_bytes(t) + "x";
  EXPECT_THROW(tensor_from_bytes(bytes), FormatError);
}
