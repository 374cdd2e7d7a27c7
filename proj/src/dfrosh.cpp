#include "frosketch/dfrosh.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <string>

#include "frosketch/centering.hpp"
#include "frosketch/error.hpp"
#include "frosketch/rng.hpp"

namespace frosketch {

std::uint64_t worker_seed(std::uint64_t seed, std::uint32_t worker_id) {
  return worker_id == 0 ? seed : derive_seed(seed, 0x776f726b00000000ULL | worker_id);
}

WorkerSummary worker_sketch(const DenseMatrix& part, const TrainConfig& cfg, std::uint32_t worker_id) {
  require(part.rows() >= 1, "worker needs at least one row");
  TrainConfig local = cfg;
  local.eta = std::numeric_limits<std::size_t>::max();
  FroshTrainer trainer(local, part.cols());
  const std::size_t step = trainer.config().chunk_rows;
  for (std::size_t begin = 0; begin < part.rows(); begin += step) {
    trainer.feed(part.slice_rows(begin, std::min(part.rows(), begin + step)));
  }
  WorkerSummary s;
  s.b = trainer.finalize_sketch();
  s.mu.assign(trainer.centering().phi().begin(), trainer.centering().phi().end());
  s.n = trainer.centering().tau();
  s.worker_id = worker_id;
  return s;
}

WorkerSummary summarize(const FroshTrainer& trainer, std::uint32_t worker_id) {
  require(trainer.centering().tau() >= 1, "summary needs at least one row");
  WorkerSummary s;
  s.b = trainer.sketcher().snapshot();
  s.mu.assign(trainer.centering().phi().begin(), trainer.centering().phi().end());
  s.n = trainer.centering().tau();
  s.worker_id = worker_id;
  return s;
}

MergedSketch merge(std::span<const WorkerSummary> summaries, std::size_t ell) {
  require(!summaries.empty(), "merge needs at least one summary");
  std::vector<const WorkerSummary*> order;
  for (const auto& s : summaries) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](const WorkerSummary* a, const WorkerSummary* b) { return a->worker_id < b->worker_id; });

  const std::size_t d = order.front()->b.cols();
  for (const auto* s : order) {
    if (s->b.rows() != ell || s->b.cols() != d || s->mu.size() != d) {
      throw ArgumentError("merge: worker " + std::to_string(s->worker_id) + " has shape " +
                          std::to_string(s->b.rows()) + "x" + std::to_string(s->b.cols()) + ", expected " +
                          std::to_string(ell) + "x" + std::to_string(d));
    }
    require(s->n >= 1, "merge: worker " + std::to_string(s->worker_id) + " reports zero rows");
  }

  FdSketch sketch = FdSketch::from_matrix(order.front()->b);
  std::vector<double> phi = order.front()->mu;
  std::uint64_t tau = order.front()->n;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const WorkerSummary& s = *order[i];
    const auto corr = correction_row(phi, tau, s.mu, s.n);
    sketch.insert(s.b);
    sketch.insert_row(corr);
    merge_mean(phi, tau, s.mu, s.n);
    tau += s.n;
  }
  return {sketch.matrix(), std::move(phi), tau};
}

HashModel train_distributed(std::span<const DenseMatrix> parts, const TrainConfig& cfg, DistributedOptions options) {
  require(!parts.empty(), "distributed training needs at least one part");
  const std::size_t d = parts.front().cols();
  for (const auto& p : parts) require(p.cols() == d, "distributed training: parts disagree on d");
  const TrainConfig base = cfg.resolved(d);

  auto run = [&](std::size_t i) {
    TrainConfig local = base;
    local.seed = worker_seed(base.seed, static_cast<std::uint32_t>(i));
    return worker_sketch(parts[i], local, static_cast<std::uint32_t>(i));
  };

  std::vector<WorkerSummary> summaries(parts.size());
  if (options.concurrent && parts.size() > 1) {
    std::vector<std::future<WorkerSummary>> jobs;
    for (std::size_t i = 0; i < parts.size(); ++i) jobs.push_back(std::async(std::launch::async, run, i));
    for (std::size_t i = 0; i < parts.size(); ++i) summaries[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < parts.size(); ++i) summaries[i] = run(i);
  }

  const MergedSketch merged = merge(summaries, base.ell);
  return model_from_sketch(merged.b, merged.phi, base.bits);
}

std::vector<DenseMatrix> split_even(const DenseMatrix& a, std::size_t parts) {
  require(parts >= 1, "split needs at least one part");
  require(a.rows() >= parts, "split: fewer rows than parts");
  const std::size_t base = a.rows() / parts;
  std::vector<DenseMatrix> out;
  for (std::size_t i = 0; i < parts; ++i) {
    const std::size_t begin = i * base;
    const std::size_t end = i + 1 == parts ? a.rows() : begin + base;
    out.push_back(a.slice_rows(begin, end));
  }
  return out;
}

} // namespace frosketch
