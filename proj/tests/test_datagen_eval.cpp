#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "frosketch/datagen.hpp"
#include "frosketch/error.hpp"
#include "frosketch/eval.hpp"
#include "frosketch/fd_sketch.hpp"
#include "test_support.hpp"

using namespace frosketch;
using testing_support::gaussian;

namespace {

std::vector<double> singular_values(const DenseMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(a.map()));
  const Eigen::VectorXd s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

// Straightforward AP: walk the ranking, count hits, average precision at hits.
double reference_ap(const std::vector<std::uint32_t>& ranking, const std::vector<std::uint32_t>& truth) {
  if (truth.empty()) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
    if (std::find(truth.begin(), truth.end(), ranking[pos]) != truth.end()) {
      ++hits;
      sum += double(hits) / double(pos + 1);
    }
  }
  return sum / double(truth.size());
}

std::vector<std::uint32_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0u);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.uniform_below(i)]);
  return p;
}

} // namespace

TEST(SynthLowrank, NoiselessDataHasRankK) {
  SynthConfig cfg;
  cfg.n = 300;
  cfg.d = 40;
  cfg.k = 7;
  cfg.gamma = 1e9;
  cfg.seed = 1;
  const auto s = singular_values(synth_lowrank(cfg));
  EXPECT_LT(s[7] / s[0], 1e-6);
}

TEST(SynthLowrank, LeadingSpectrumDominates) {
  SynthConfig cfg;
  cfg.n = 1000;
  cfg.d = 64;
  cfg.seed = 1;
  const DenseMatrix a = synth_lowrank(cfg);
  EXPECT_EQ(a.rows(), 1000u);
  EXPECT_EQ(a.cols(), 64u);
  const auto s = singular_values(a);
  EXPECT_GT(s[9], s[10]);
}

TEST(SynthLowrank, DeterministicAndValidated) {
  SynthConfig cfg;
  cfg.n = 50;
  cfg.d = 12;
  cfg.seed = 5;
  EXPECT_EQ(synth_lowrank(cfg), synth_lowrank(cfg));
  SynthConfig other = cfg;
  other.seed = 6;
  EXPECT_FALSE(synth_lowrank(cfg) == synth_lowrank(other));
  cfg.k = 13;
  EXPECT_THROW(synth_lowrank(cfg), ArgumentError);
  cfg.k = 10;
  cfg.gamma = 0.0;
  EXPECT_THROW(synth_lowrank(cfg), ArgumentError);
}

TEST(SynthClusters, ShapeDeterminismAndValidation) {
  ClusterConfig cfg;
  cfg.n = 200;
  cfg.d = 16;
  cfg.latent = 8;
  cfg.seed = 3;
  const DenseMatrix a = synth_clusters(cfg);
  EXPECT_EQ(a.rows(), 200u);
  EXPECT_EQ(a.cols(), 16u);
  EXPECT_EQ(a, synth_clusters(cfg));
  cfg.latent = 17;
  EXPECT_THROW(synth_clusters(cfg), ArgumentError);
}

TEST(SynthClusters, NoiselessRowsLieInLatentSubspace) {
  ClusterConfig cfg;
  cfg.n = 300;
  cfg.d = 20;
  cfg.latent = 5;
  cfg.noise = 0.0;
  cfg.seed = 4;
  const auto s = singular_values(synth_clusters(cfg));
  EXPECT_LT(s[5] / s[0], 1e-10);
}

TEST(RelativeError, ClosedFormCases) {
  const DenseMatrix a = gaussian(40, 6, 1);
  EXPECT_NEAR(relative_error(a, a), 0.0, 1e-12);
  const double e = relative_error(a, DenseMatrix(3, 6));
  const auto s = singular_values(a);
  double total = 0.0;
  for (double v : s) total += v * v;
  EXPECT_NEAR(e, s[0] * s[0] / total, 1e-8);
  EXPECT_LE(e, 1.0);
  EXPECT_THROW(relative_error(a, DenseMatrix(2, 5)), ArgumentError);
}

TEST(RelativeError, MatchesDenseOracle) {
  const DenseMatrix a = gaussian(80, 10, 2);
  const DenseMatrix b = gaussian(6, 10, 3);
  EXPECT_NEAR(relative_error(a, b), testing_support::oracle_rel_error(a, b), 1e-7);
  EXPECT_NEAR(relative_error_from_gram(gram(a), a.frobenius_norm_squared(), b), relative_error(a, b), 1e-12);
}

TEST(RelativeError, FdSketchRespectsBound) {
  const DenseMatrix a = gaussian(500, 32, 4);
  FdSketch s(16, 32);
  s.insert(a);
  EXPECT_LE(relative_error(a, s.matrix()), 0.125);
}

TEST(RelativeError, CenteredVariantUsesRowMean) {
  DenseMatrix a = gaussian(60, 5, 5);
  for (double& v : a.data()) v += 10.0;
  const DenseMatrix c = testing_support::centered(a);
  const DenseMatrix b = gaussian(4, 5, 6);
  EXPECT_NEAR(centered_relative_error(a, b), testing_support::oracle_rel_error(c, b), 1e-7);
}

TEST(MakeTask, TruthSizes) {
  EXPECT_EQ(truth_size(100, 0.02), 2u);
  EXPECT_EQ(truth_size(101, 0.02), 3u);
  EXPECT_EQ(truth_size(20000, 0.02), 400u);
  EXPECT_EQ(truth_size(7, 1.0), 7u);
  EXPECT_THROW(make_task(gaussian(5, 2, 1), gaussian(1, 2, 2), 0.0), ArgumentError);
  EXPECT_THROW(make_task(gaussian(5, 2, 1), gaussian(1, 2, 2), 1.5), ArgumentError);
}

TEST(MakeTask, QueryInDatabaseFindsItself) {
  const DenseMatrix db = gaussian(100, 4, 7);
  const RetrievalTask t = make_task(db, db.slice_rows(17, 18));
  ASSERT_EQ(t.truth[0].size(), 2u);
  EXPECT_EQ(t.truth[0][0], 17u);
}

TEST(MakeTask, MatchesBruteForceDistances) {
  const DenseMatrix db = gaussian(250, 6, 8);
  const DenseMatrix q = gaussian(7, 6, 9);
  const RetrievalTask t = make_task(db, q, 0.05);
  for (std::size_t i = 0; i < q.rows(); ++i) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t j = 0; j < db.rows(); ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < 6; ++c) d2 += (q(i, c) - db(j, c)) * (q(i, c) - db(j, c));
      all.emplace_back(d2, j);
    }
    std::sort(all.begin(), all.end());
    ASSERT_EQ(t.truth[i].size(), 13u);
    for (std::size_t k = 0; k < 13; ++k) EXPECT_EQ(t.truth[i][k], all[k].second);
  }
}

TEST(MakeTask, BoundaryTiesBreakByIndex) {
  const DenseMatrix db{{1}, {-1}, {1}, {5}};
  const RetrievalTask t = make_task(db, DenseMatrix{{0}}, 0.5);
  EXPECT_EQ(t.truth[0], (std::vector<std::uint32_t>{0, 1}));
}

TEST(AveragePrecision, ClosedForms) {
  const std::vector<std::uint32_t> ranking{0, 1, 2, 3};
  EXPECT_DOUBLE_EQ(average_precision(ranking, std::vector<std::uint32_t>{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(average_precision(std::vector<std::uint32_t>{5, 4, 0, 1, 2, 3}, std::vector<std::uint32_t>{0}),
                   1.0 / 3.0);
  EXPECT_EQ(average_precision(ranking, std::vector<std::uint32_t>{}), 0.0);
}

TEST(AveragePrecision, MapMatchesReferenceOnRandomRankings) {
  Rng rng(10);
  std::vector<std::vector<std::uint32_t>> rankings, truths;
  for (int q = 0; q < 30; ++q) {
    rankings.push_back(shuffled(200, rng));
    auto t = shuffled(200, rng);
    t.resize(1 + rng.uniform_below(20));
    truths.push_back(t);
  }
  double ref = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const double ap = average_precision(rankings[q], truths[q]);
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
    ref += reference_ap(rankings[q], truths[q]);
  }
  ref /= double(rankings.size());
  EXPECT_NEAR(map_score(rankings, truths), ref, 1e-12);
}

TEST(AveragePrecision, ImprovingARankingNeverLowersMap) {
  Rng rng(11);
  std::vector<std::vector<std::uint32_t>> rankings, truths;
  for (int q = 0; q < 5; ++q) {
    rankings.push_back(shuffled(50, rng));
    auto t = shuffled(50, rng);
    t.resize(5);
    truths.push_back(t);
  }
  double prev = map_score(rankings, truths);
  for (int step = 0; step < 200; ++step) {
    auto& r = rankings[rng.uniform_below(5)];
    const auto& t = truths[&r - rankings.data()];
    // Move a true neighbor one position up past a non-neighbor.
    for (std::size_t pos = 1; pos < r.size(); ++pos) {
      const bool hit = std::find(t.begin(), t.end(), r[pos]) != t.end();
      const bool prev_hit = std::find(t.begin(), t.end(), r[pos - 1]) != t.end();
      if (hit && !prev_hit) {
        std::swap(r[pos], r[pos - 1]);
        break;
      }
    }
    const double now = map_score(rankings, truths);
    EXPECT_GE(now, prev - 1e-15);
    prev = now;
  }
}

TEST(AveragePrecision, FullFractionMakesEveryRankingPerfect) {
  const DenseMatrix db = gaussian(30, 3, 12);
  const RetrievalTask t = make_task(db, gaussian(4, 3, 13), 1.0);
  Rng rng(14);
  for (const auto& truth : t.truth) {
    EXPECT_EQ(truth.size(), 30u);
    EXPECT_DOUBLE_EQ(average_precision(shuffled(30, rng), truth), 1.0);
  }
}

TEST(PrCurve, RecallAndPrecisionAtCuts) {
  const std::vector<std::vector<std::uint32_t>> rankings{{0, 1, 2, 3}};
  const std::vector<std::vector<std::uint32_t>> truths{{1, 3}};
  const std::vector<std::size_t> cuts{1, 2, 4};
  const auto pr = pr_curve(rankings, truths, cuts);
  ASSERT_EQ(pr.size(), 3u);
  EXPECT_DOUBLE_EQ(pr[0].recall, 0.0);
  EXPECT_DOUBLE_EQ(pr[0].precision, 0.0);
  EXPECT_DOUBLE_EQ(pr[1].recall, 0.5);
  EXPECT_DOUBLE_EQ(pr[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(pr[2].recall, 1.0);
  EXPECT_DOUBLE_EQ(pr[2].precision, 0.5);
}

TEST(PrCurve, EvenCutsSpanRange) {
  const auto cuts = even_cuts(100, 5);
  ASSERT_EQ(cuts.size(), 5u);
  EXPECT_EQ(cuts.front(), 20u);
  EXPECT_EQ(cuts.back(), 100u);
  EXPECT_TRUE(std::is_sorted(cuts.begin(), cuts.end()));
}

TEST(EvaluateMap, PerfectModelOnSeparatedClusters) {
  // Two well separated clusters along the hashing direction.
  DenseMatrix db(40, 2);
  for (std::size_t i = 0; i < 40; ++i) db(i, 0) = i < 20 ? -10.0 - 0.01 * double(i) : 10.0 + 0.01 * double(i);
  const RetrievalTask t = make_task(db, DenseMatrix{{-10.1, 0.0}}, 0.5);
  const HashModel model{DenseMatrix{{1}, {0}}, {0.0, 0.0}};
  EXPECT_DOUBLE_EQ(evaluate_map(model, t), 1.0);
}
