#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "frosketch/frosh.hpp"
#include "frosketch/matrix.hpp"

namespace frosketch {

/// Exact Euclidean ground truth: every query's top ceil(fraction * n)
/// database rows, ties at the boundary broken by lower index. Truth lists
/// are sorted by (distance, index).
struct RetrievalTask {
  DenseMatrix database;
  DenseMatrix queries;
  double fraction = 0.02;
  std::vector<std::vector<std::uint32_t>> truth;
};

std::size_t truth_size(std::size_t n, double fraction);

RetrievalTask make_task(DenseMatrix database, DenseMatrix queries, double fraction = 0.02);

/// Mean of precision@k over the positions k of the true hits. Empty truth
/// gives 0.
double average_precision(std::span<const std::uint32_t> ranking, std::span<const std::uint32_t> truth);

double map_score(std::span<const std::vector<std::uint32_t>> rankings,
                 std::span<const std::vector<std::uint32_t>> truths);

struct PrPoint {
  std::size_t returned = 0;
  double recall = 0.0;
  double precision = 0.0;
};

/// Query-averaged precision and recall after returning each cut's number of
/// points.
std::vector<PrPoint> pr_curve(std::span<const std::vector<std::uint32_t>> rankings,
                              std::span<const std::vector<std::uint32_t>> truths, std::span<const std::size_t> cuts);

/// `count` cut points spread evenly over [1, n].
std::vector<std::size_t> even_cuts(std::size_t n, std::size_t count);

/// Hamming rankings of all queries against the hashed database.
std::vector<std::vector<std::uint32_t>> rank_queries(const HashModel& model, const RetrievalTask& task);

double evaluate_map(const HashModel& model, const RetrievalTask& task);

} // namespace frosketch
