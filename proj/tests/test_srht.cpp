#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "frosketch/error.hpp"
#include "frosketch/rng.hpp"
#include "frosketch/srht.hpp"
#include "test_support.hpp"

using namespace frosketch;
using testing_support::gaussian;

namespace {

// Explicit sqrt(m/q) S H D with H built entry by entry from the sign rule.
Eigen::MatrixXd dense_phi(const SrhtOperator& op) {
  const auto m = static_cast<Eigen::Index>(op.m());
  const auto q = static_cast<Eigen::Index>(op.q());
  Eigen::MatrixXd h(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      h(i, j) = hadamard_sign(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)) / std::sqrt(double(m));
    }
  }
  Eigen::MatrixXd phi(q, m);
  for (Eigen::Index r = 0; r < q; ++r) {
    const auto s = static_cast<Eigen::Index>(op.sample_indices()[static_cast<std::size_t>(r)]);
    for (Eigen::Index j = 0; j < m; ++j) phi(r, j) = h(s, j) * op.signs()[static_cast<std::size_t>(j)];
  }
  return phi * std::sqrt(double(m) / double(q));
}

DenseMatrix blocked(const SrhtOperator& op, const DenseMatrix& f, WorkspaceProbe* probe = nullptr) {
  MatrixRowStream rows(f);
  return apply_blocked(op, rows, f.cols(), probe);
}

} // namespace

TEST(SrhtOperator, Invariants) {
  const SrhtOperator full(8, 8, 123);
  std::vector<std::size_t> idx(full.sample_indices().begin(), full.sample_indices().end());
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(idx[i], i);

  const SrhtOperator op(16, 4, 1);
  const std::set<std::size_t> distinct(op.sample_indices().begin(), op.sample_indices().end());
  EXPECT_EQ(distinct.size(), 4u);
  for (auto s : distinct) EXPECT_LT(s, 16u);
  ASSERT_EQ(op.signs().size(), 16u);
  for (int s : op.signs()) EXPECT_TRUE(s == 1 || s == -1);
  EXPECT_EQ(op, SrhtOperator(16, 4, 1));
  EXPECT_FALSE(op == SrhtOperator(16, 4, 2));
}

TEST(SrhtOperator, RejectsBadShapes) {
  EXPECT_THROW(SrhtOperator(12, 4, 0), ArgumentError);
  EXPECT_THROW(SrhtOperator(8, 0, 0), ArgumentError);
  EXPECT_THROW(SrhtOperator(8, 9, 0), ArgumentError);
}

TEST(SrhtOperator, BlockRowsIsPowerOfTwoInHalfOpenRange) {
  for (std::size_t q : {1u, 2u, 3u, 5u, 8u, 12u, 31u, 32u}) {
    const SrhtOperator op(64, q, 0);
    EXPECT_TRUE(is_power_of_two(op.block_rows()));
    EXPECT_LE(op.block_rows(), q);
    EXPECT_GT(2 * op.block_rows(), q);
  }
}

TEST(SrhtApply, FullSamplingIsOrthonormal) {
  const SrhtOperator op(16, 16, 77);
  const DenseMatrix out = apply(op, DenseMatrix::identity(16));
  const Eigen::MatrixXd o = out.map();
  EXPECT_LT((o.transpose() * o - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SrhtApply, MatchesDenseOperator) {
  const SrhtOperator op(8, 4, 5);
  const DenseMatrix f = gaussian(8, 3, 50);
  const Eigen::MatrixXd expect = dense_phi(op) * Eigen::MatrixXd(f.map());
  const DenseMatrix got = apply(op, f);
  EXPECT_LT((Eigen::MatrixXd(got.map()) - expect).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SrhtApply, MonteCarloExpectationIsIdentity) {
  // E[(Φf)ᵀ(Φf)] = fᵀf since E[ΦᵀΦ] = I.
  const DenseMatrix f = gaussian(16, 4, 60);
  const Eigen::MatrixXd target = testing_support::naive_gram(f);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(4, 4);
  const int trials = 5000;
  for (int s = 0; s < trials; ++s) {
    const DenseMatrix c = apply(SrhtOperator(16, 4, static_cast<std::uint64_t>(s)), f);
    mean += testing_support::naive_gram(c);
  }
  mean /= trials;
  const double dominant = target.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (std::abs(target(i, j)) > 0.25 * dominant) {
        EXPECT_NEAR(mean(i, j), target(i, j), 0.10 * std::abs(target(i, j))) << i << "," << j;
      }
    }
  }
}

TEST(SrhtApply, MonteCarloErrorShrinksWithTrials) {
  const DenseMatrix f = gaussian(16, 4, 61);
  const Eigen::MatrixXd target = testing_support::naive_gram(f);
  auto error_after = [&](int trials, std::uint64_t offset) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(4, 4);
    for (int s = 0; s < trials; ++s) {
      mean += testing_support::naive_gram(apply(SrhtOperator(16, 4, offset + static_cast<std::uint64_t>(s)), f));
    }
    return (mean / trials - target).norm();
  };
  // Averaged over a few disjoint seed ranges to keep the comparison stable.
  double small = 0.0, large = 0.0;
  for (std::uint64_t rep = 0; rep < 4; ++rep) {
    small += error_after(100, 1000000 * (rep + 1));
    large += error_after(1600, 1000000 * (rep + 11));
  }
  EXPECT_LT(large, small / 2.0);
}

TEST(SrhtApply, ColumnNormBoundRarelyViolated) {
  const std::size_t m = 64, d = 8;
  const double beta = 0.05;
  const double factor = std::sqrt(2.0 * std::log(2.0 * m * d / beta));
  std::size_t violations = 0, total = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const DenseMatrix f = gaussian(m, d, 5000 + s);
    const DenseMatrix c = apply(SrhtOperator(m, 16, s), f);
    for (std::size_t j = 0; j < d; ++j) {
      double in = 0.0, out = 0.0;
      for (std::size_t i = 0; i < m; ++i) in += f(i, j) * f(i, j);
      for (std::size_t i = 0; i < c.rows(); ++i) out += c(i, j) * c(i, j);
      if (std::sqrt(out) > factor * std::sqrt(in)) ++violations;
      ++total;
    }
  }
  EXPECT_LT(double(violations) / double(total), 0.05);
}

TEST(SrhtApply, FullSamplingPreservesFrobeniusNorm) {
  const DenseMatrix f = gaussian(32, 5, 62);
  const DenseMatrix c = apply(SrhtOperator(32, 32, 8), f);
  EXPECT_NEAR(std::sqrt(c.frobenius_norm_squared()), std::sqrt(f.frobenius_norm_squared()), 1e-10);
}

TEST(SrhtApply, RejectsWrongRowCount) {
  EXPECT_THROW(apply(SrhtOperator(8, 4, 0), gaussian(7, 2, 0)), ArgumentError);
}

TEST(SrhtBlocked, MatchesDirectAcrossShapesAndSeeds) {
  const std::size_t shapes[][3] = {{8, 4, 3}, {16, 16, 2}, {64, 8, 5}, {256, 32, 8}};
  for (const auto& s : shapes) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SrhtOperator op(s[0], s[1], seed);
      const DenseMatrix f = gaussian(s[0], s[2], 900 + seed);
      ASSERT_LT(testing_support::max_abs_diff(blocked(op, f), apply(op, f)), 1e-10)
          << s[0] << "x" << s[1] << " seed " << seed;
    }
  }
}

TEST(SrhtBlocked, MatchesDirectOnSmallCase) {
  const SrhtOperator op(8, 4, 5);
  const DenseMatrix f = gaussian(8, 3, 51);
  EXPECT_LT(testing_support::max_abs_diff(blocked(op, f), apply(op, f)), 1e-10);
}

TEST(SrhtBlocked, SingleBlockWhenQEqualsM) {
  const SrhtOperator op(16, 16, 9);
  const DenseMatrix f = gaussian(16, 2, 52);
  EXPECT_EQ(op.block_rows(), 16u);
  EXPECT_LT(testing_support::max_abs_diff(blocked(op, f), apply(op, f)), 1e-10);
}

TEST(SrhtBlocked, NonPowerOfTwoQ) {
  const SrhtOperator op(64, 12, 4);
  const DenseMatrix f = gaussian(64, 5, 53);
  EXPECT_EQ(op.block_rows(), 8u);
  EXPECT_LT(testing_support::max_abs_diff(blocked(op, f), apply(op, f)), 1e-10);
}

TEST(SrhtBlocked, LargeCaseStaysWithinWorkspaceBudget) {
  const SrhtOperator op(1024, 32, 21);
  const DenseMatrix f = gaussian(1024, 8, 54);
  WorkspaceProbe probe;
  const DenseMatrix got = blocked(op, f, &probe);
  EXPECT_LT(testing_support::max_abs_diff(got, apply(op, f)), 1e-10);
  EXPECT_GT(probe.allocations, 0u);
  EXPECT_LE(probe.peak_rows, op.block_rows() + op.q());
}

TEST(SrhtBlocked, StreamLengthIsChecked) {
  const SrhtOperator op(8, 4, 5);
  const DenseMatrix short_f = gaussian(7, 2, 1);
  const DenseMatrix long_f = gaussian(9, 2, 1);
  EXPECT_THROW(blocked(op, short_f), StreamLengthError);
  EXPECT_THROW(blocked(op, long_f), StreamLengthError);
}

TEST(SrhtBlocked, CompressionNormBoundHolds) {
  // ‖Φf‖²_F stays within a small factor of ‖f‖²_F for incoherent data.
  const DenseMatrix f = gaussian(512, 16, 70);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SrhtOperator op(512, 64, s);
    const double ratio = blocked(op, f).frobenius_norm_squared() / f.frobenius_norm_squared();
    EXPECT_GT(ratio, 0.6);
    EXPECT_LT(ratio, 1.4);
  }
}
