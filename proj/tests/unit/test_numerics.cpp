#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "favor/errors.hpp"
#include "favor/linalg.hpp"
#include "favor/matrix.hpp"
#include "favor/rng.hpp"
#include "favor/sampling.hpp"
#include "favor/summary.hpp"
#include "oracles.hpp"

using namespace favor;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  return sample_gaussian(RngStream(seed, 7), r, c);
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  // Reference outputs published with the Random123 distribution.
  const auto zero = PhiloxEngine::block({0, 0, 0, 0}, {0, 0});
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);

  const std::uint32_t f = 0xffffffffu;
  const auto ones = PhiloxEngine::block({f, f, f, f}, {f, f});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("streams are reproducible and independent") {
  PhiloxEngine a(42, 3), b(42, 3), c(42, 4), e(43, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    seen.insert(x);
    seen.insert(c());
    seen.insert(e());
  }
  CHECK(seen.size() == 300);

  const RngStream s(42, 9);
  CHECK(s.substream(1) == s.substream(1));
  CHECK_FALSE(s.substream(1) == s.substream(2));
  CHECK_FALSE(s.substream(0) == s);
  CHECK(s.substream(5).master_seed() == 42);
}

TEST_CASE("seek_block gives random access") {
  PhiloxEngine seq(7, 1);
  for (int i = 0; i < 10; ++i) seq();  // blocks 0..4
  PhiloxEngine jump(7, 1);
  jump.seek_block(5);
  CHECK(seq() == jump());
}

TEST_CASE("uniform and normal samplers") {
  PhiloxEngine eng(1, 2);
  double lo = 1, hi = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = eng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);

  NormalSampler n(PhiloxEngine(3, 4));
  std::vector<double> xs(200000);
  for (double& x : xs) x = n();
  const double mean = pairwise_mean(xs);
  const double var = sample_variance(xs);
  double m4 = 0;
  for (double x : xs) m4 += x * x * x * x;
  m4 /= xs.size();
  CHECK(std::abs(mean) < 5 * std::sqrt(1.0 / xs.size()));
  CHECK(std::abs(var - 1.0) < 5 * std::sqrt(2.0 / xs.size()));
  CHECK(std::abs(m4 - 3.0) < 5 * std::sqrt(96.0 / xs.size()));
}

TEST_CASE("chi norms have E[chi^2] = d") {
  const auto norms = chi_norms(RngStream(11, 0), 50000, 16);
  std::vector<double> sq;
  for (double r : norms) {
    CHECK(r > 0);
    sq.push_back(r * r);
  }
  CHECK(std::abs(pairwise_mean(sq) - 16.0) < 5 * std::sqrt(32.0 / sq.size()));
}

TEST_CASE("sample_gaussian rejects empty shapes and is a pure function of the stream") {
  CHECK_THROWS_AS(sample_gaussian(RngStream(1, 1), 0, 3), InvalidArgument);
  CHECK(sample_gaussian(RngStream(1, 1), 4, 3) == sample_gaussian(RngStream(1, 1), 4, 3));
  CHECK_FALSE(sample_gaussian(RngStream(1, 1), 4, 3) == sample_gaussian(RngStream(1, 2), 4, 3));
}

TEST_CASE("DenseMatrix construction checks") {
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), InvalidArgument);
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, std::nan("")}), InvalidArgument);
  const DenseMatrix m = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(m.shape_string() == "2x3");
  CHECK(m(1, 2) == 6);
  CHECK(transpose(m) == oracle::transpose(m));
  CHECK(DenseMatrix::identity(3)(1, 1) == 1.0);
  CHECK(DenseMatrix::identity(3)(0, 1) == 0.0);
}

TEST_CASE("matmul variants agree with the triple loop") {
  for (auto [r, k, c] : {std::tuple{1, 1, 1}, {3, 5, 2}, {17, 9, 13}, {64, 33, 8}}) {
    const DenseMatrix a = random_matrix(r, k, 100 + r);
    const DenseMatrix b = random_matrix(k, c, 200 + c);
    const DenseMatrix ref = oracle::matmul(a, b);
    CHECK(max_abs_diff(matmul(a, b), ref) < 1e-12);
    CHECK(max_abs_diff(matmul_transposed(a, oracle::transpose(b)), ref) < 1e-12);
    CHECK(max_abs_diff(matmul_lhs_transposed(oracle::transpose(a), b), ref) < 1e-12);
  }
}

TEST_CASE("matmul shape and overflow errors") {
  const DenseMatrix a(3, 4), b(5, 2);
  try {
    (void)matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3x4") != std::string::npos);
    CHECK(msg.find("5x2") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul_transposed(a, b), ShapeError);
  CHECK_THROWS_AS(matmul_lhs_transposed(a, b), ShapeError);

  const DenseMatrix big = DenseMatrix::from_rows({{1e200, 1e200}});
  CHECK_THROWS_AS(matmul(big, transpose(big)), OverflowError);
}

TEST_CASE("Gram-Schmidt produces orthonormal rows spanning the same flags") {
  const DenseMatrix g = random_matrix(16, 16, 5);
  const DenseMatrix q = gram_schmidt_directions(g);
  const DenseMatrix gram = matmul_transposed(q, q);
  CHECK(max_abs_diff(gram, DenseMatrix::identity(16)) < 1e-13);
  // Row i lies in span(g_0..g_i): its component along later Gram-Schmidt
  // directions of g is zero, i.e. q is lower triangular in the basis q itself
  // and g_i . q_j = 0 for j > i.
  const DenseMatrix coeff = matmul_transposed(g, q);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = i + 1; j < 16; ++j) CHECK(std::abs(coeff(i, j)) < 1e-12);
  CHECK(gram_schmidt_directions(random_matrix(3, 10, 6)).rows() == 3);
}

TEST_CASE("Gram-Schmidt reports rank deficiency") {
  DenseMatrix g = random_matrix(4, 6, 8);
  for (std::size_t c = 0; c < 6; ++c) g(2, c) = 2.0 * g(0, c) - g(1, c);
  try {
    (void)gram_schmidt_directions(g);
    FAIL("expected RankDeficiencyError");
  } catch (const RankDeficiencyError& e) {
    CHECK(e.row() == 2);
    CHECK(e.residual() <= kGramSchmidtPivotThreshold);
  }
  DenseMatrix z(2, 3);
  CHECK_THROWS_AS(gram_schmidt_directions(z), RankDeficiencyError);
  CHECK_THROWS_AS(gram_schmidt_directions(random_matrix(5, 4, 1)), InvalidArgument);
}

TEST_CASE("summary statistics") {
  std::vector<double> ints;
  for (int i = 1; i <= 1001; ++i) ints.push_back(i);
  CHECK(pairwise_sum(ints) == 501501.0);
  CHECK(pairwise_mean(ints) == 501.0);
  CHECK(median(ints) == 501.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(sample_variance(std::vector<double>{1, 2, 3, 4}) == doctest::Approx(5.0 / 3.0));

  std::vector<double> x{1, 2, 4, 8, 16}, y;
  for (double v : x) y.push_back(3.0 * v * v);
  CHECK(loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));

  // Tree summation keeps the tiny terms that left-to-right summation drops.
  std::vector<double> v(1 << 20, 1e-16);
  v[0] = 1.0;
  CHECK(pairwise_sum(v) > 1.0 + 1e-10);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  for (std::size_t threads : {1, 2, 5, 64}) {
    std::vector<std::atomic<int>> hits(37);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
