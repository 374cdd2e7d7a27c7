#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "frosketch/frosh.hpp"
#include "frosketch/matrix.hpp"

namespace frosketch {

/// What a worker ships to the center: its finalized sketch, row mean and
/// row count.
struct WorkerSummary {
  DenseMatrix b; // ell x d
  std::vector<double> mu;
  std::uint64_t n = 0;
  std::uint32_t worker_id = 0;

  bool operator==(const WorkerSummary&) const = default;
};

struct MergedSketch {
  DenseMatrix b;
  std::vector<double> phi;
  std::uint64_t tau = 0;
};

/// Seed used by worker `worker_id`. Worker 0 keeps the master seed so a
/// single-worker run matches single-machine training.
std::uint64_t worker_seed(std::uint64_t seed, std::uint32_t worker_id);

/// Centers and sketches one worker's rows in chunks of cfg.chunk_rows, then
/// flushes pending rows. cfg.seed is used as given.
WorkerSummary worker_sketch(const DenseMatrix& part, const TrainConfig& cfg, std::uint32_t worker_id);

/// Summary of everything a live trainer has seen, pending FFD rows flushed
/// on a copy. Equals worker_sketch when fed the same chunks.
WorkerSummary summarize(const FroshTrainer& trainer, std::uint32_t worker_id);

/// Center-machine merge. Starts from the lowest worker_id's summary, then for
/// every further summary in ascending worker_id order FD-inserts its sketch
/// rows followed by the correction row sqrt(tau n_i / (tau + n_i)) (mu_i - phi)
/// and updates phi and tau.
MergedSketch merge(std::span<const WorkerSummary> summaries, std::size_t ell);

struct DistributedOptions {
  /// Run workers on separate threads; the result does not depend on it.
  bool concurrent = true;
};

/// Sketches every part as worker i (seed worker_seed(cfg.seed, i)), merges
/// and extracts the model.
HashModel train_distributed(std::span<const DenseMatrix> parts, const TrainConfig& cfg,
                            DistributedOptions options = {});

/// Contiguous equal split, remainder to the last part.
std::vector<DenseMatrix> split_even(const DenseMatrix& a, std::size_t parts);

} // namespace frosketch
