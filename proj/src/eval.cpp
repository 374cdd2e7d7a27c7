#include "frosketch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "frosketch/error.hpp"

namespace frosketch {

std::size_t truth_size(std::size_t n, double fraction) {
  // Guard against 0.02 * 100 landing a hair above 2.
  const double raw = fraction * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(k, 1, n);
}

RetrievalTask make_task(DenseMatrix database, DenseMatrix queries, double fraction) {
  require(fraction > 0.0 && fraction <= 1.0, "retrieval fraction must be in (0, 1]");
  require(database.rows() >= 1, "retrieval task needs a non-empty database");
  require(queries.cols() == database.cols(), "queries and database disagree on d");
  const std::size_t n = database.rows();
  const std::size_t d = database.cols();
  const std::size_t k = truth_size(n, fraction);

  RetrievalTask task;
  task.fraction = fraction;
  task.truth.resize(queries.rows());
  std::vector<std::pair<double, std::uint32_t>> dist(n);
  for (std::size_t qi = 0; qi < queries.rows(); ++qi) {
    const auto q = queries.row(qi);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = database.row(i);
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x[c] - q[c];
        s += diff * diff;
      }
      dist[i] = {s, static_cast<std::uint32_t>(i)};
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
    auto& t = task.truth[qi];
    t.reserve(k);
    for (std::size_t i = 0; i < k; ++i) t.push_back(dist[i].second);
  }
  task.database = std::move(database);
  task.queries = std::move(queries);
  return task;
}

namespace {

std::vector<char> membership(std::span<const std::uint32_t> truth, std::size_t n) {
  std::vector<char> in(n, 0);
  for (auto t : truth) {
    require(t < n, "truth index out of range");
    in[t] = 1;
  }
  return in;
}

std::size_t ranking_extent(std::span<const std::uint32_t> ranking, std::span<const std::uint32_t> truth) {
  std::size_t n = ranking.size();
  for (auto t : truth) n = std::max<std::size_t>(n, t + 1);
  return n;
}

} // namespace

double average_precision(std::span<const std::uint32_t> ranking, std::span<const std::uint32_t> truth) {
  if (truth.empty()) return 0.0;
  const auto in = membership(truth, ranking_extent(ranking, truth));
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < ranking.size() && hits < truth.size(); ++pos) {
    require(ranking[pos] < in.size(), "ranking index out of range");
    if (in[ranking[pos]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
    }
  }
  return sum / static_cast<double>(truth.size());
}

double map_score(std::span<const std::vector<std::uint32_t>> rankings,
                 std::span<const std::vector<std::uint32_t>> truths) {
  require(rankings.size() == truths.size(), "map: rankings and truths differ in count");
  if (rankings.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < rankings.size(); ++i) s += average_precision(rankings[i], truths[i]);
  return s / static_cast<double>(rankings.size());
}

std::vector<PrPoint> pr_curve(std::span<const std::vector<std::uint32_t>> rankings,
                              std::span<const std::vector<std::uint32_t>> truths, std::span<const std::size_t> cuts) {
  require(rankings.size() == truths.size(), "pr_curve: rankings and truths differ in count");
  std::vector<PrPoint> curve(cuts.size());
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    require(cuts[c] >= 1, "pr_curve: cut points must be >= 1");
    curve[c].returned = cuts[c];
  }
  if (rankings.empty()) return curve;

  for (std::size_t qi = 0; qi < rankings.size(); ++qi) {
    const auto& ranking = rankings[qi];
    const auto& truth = truths[qi];
    const auto in = membership(truth, ranking_extent(ranking, truth));
    // hits[k] = true hits among the first k returned.
    std::vector<std::size_t> hits(ranking.size() + 1, 0);
    for (std::size_t pos = 0; pos < ranking.size(); ++pos) hits[pos + 1] = hits[pos] + (in[ranking[pos]] ? 1 : 0);
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      const std::size_t k = std::min(cuts[c], ranking.size());
      const double h = static_cast<double>(hits[k]);
      curve[c].precision += k == 0 ? 0.0 : h / static_cast<double>(k);
      curve[c].recall += truth.empty() ? 0.0 : h / static_cast<double>(truth.size());
    }
  }
  const double q = static_cast<double>(rankings.size());
  for (auto& p : curve) {
    p.precision /= q;
    p.recall /= q;
  }
  return curve;
}

std::vector<std::size_t> even_cuts(std::size_t n, std::size_t count) {
  require(n >= 1 && count >= 1, "even_cuts: n and count must be >= 1");
  std::vector<std::size_t> cuts;
  for (std::size_t i = 1; i <= count; ++i) {
    const std::size_t c = std::max<std::size_t>(1, (n * i + count / 2) / count);
    if (cuts.empty() || cuts.back() != c) cuts.push_back(c);
  }
  return cuts;
}

std::vector<std::vector<std::uint32_t>> rank_queries(const HashModel& model, const RetrievalTask& task) {
  const BinaryCodes db = hash(model, task.database);
  const BinaryCodes qc = hash(model, task.queries);
  std::vector<std::vector<std::uint32_t>> rankings(qc.n());
  for (std::size_t i = 0; i < qc.n(); ++i) rankings[i] = hamming_rank(qc.code(i), db);
  return rankings;
}

double evaluate_map(const HashModel& model, const RetrievalTask& task) {
  return map_score(rank_queries(model, task), task.truth);
}

} // namespace frosketch
