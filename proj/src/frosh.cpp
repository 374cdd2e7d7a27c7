#include "frosketch/frosh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "frosketch/error.hpp"
#include "frosketch/rng.hpp"

namespace frosketch {

TrainConfig TrainConfig::resolved(std::size_t d) const {
  require(d >= 1, "training needs d >= 1");
  TrainConfig out = *this;
  require(out.bits >= 1, "bits must be >= 1");
  if (out.ell == 0) out.ell = 2 * out.bits;
  if (out.m == 0) out.m = static_cast<std::size_t>(ceil_power_of_two(4 * d));
  if (out.chunk_rows == 0) out.chunk_rows = out.m;
  require(out.ell % 2 == 0, "ell must be even, got " + std::to_string(out.ell));
  require(out.bits <= out.ell, "bits (" + std::to_string(out.bits) + ") must not exceed ell (" +
                                   std::to_string(out.ell) + ")");
  require(out.bits <= d, "bits (" + std::to_string(out.bits) + ") must not exceed d (" + std::to_string(d) + ")");
  require(out.eta >= 1, "eta must be >= 1");
  require(is_power_of_two(out.m), "m must be a power of two, got " + std::to_string(out.m));
  require(out.m >= out.ell / 2, "m must be >= ell/2");
  return out;
}

BinaryCodes::BinaryCodes(std::size_t n, std::size_t r)
    : n_(n), r_(r), words_((r + 63) / 64), bits_(n * ((r + 63) / 64), 0) {
  require(r >= 1, "codes need at least one bit");
}

namespace {

std::variant<FdSketch, FfdSketcher> make_impl(const TrainConfig& cfg, std::size_t d) {
  if (cfg.sketcher == SketchMethod::fd) return FdSketch(cfg.ell, d);
  return FfdSketcher(cfg.ell, cfg.m, d, cfg.seed);
}

} // namespace

StreamSketcher::StreamSketcher(const TrainConfig& resolved, std::size_t d) : impl_(make_impl(resolved, d)) {}

SketchMethod StreamSketcher::method() const noexcept {
  return std::holds_alternative<FdSketch>(impl_) ? SketchMethod::fd : SketchMethod::ffd;
}

void StreamSketcher::insert(const DenseMatrix& rows) {
  std::visit([&](auto& s) { s.insert(rows); }, impl_);
}

DenseMatrix StreamSketcher::snapshot() const {
  if (const auto* fd = std::get_if<FdSketch>(&impl_)) return fd->matrix();
  return std::get<FfdSketcher>(impl_).snapshot();
}

DenseMatrix StreamSketcher::finalize() {
  if (auto* fd = std::get_if<FdSketch>(&impl_)) return fd->matrix();
  return std::get<FfdSketcher>(impl_).finalize();
}

HashModel model_from_sketch(const DenseMatrix& b, std::span<const double> mu, std::size_t r) {
  require(mu.size() == b.cols(), "model: center dimension mismatch");
  require(r >= 1 && r <= std::min(b.rows(), b.cols()), "model: r must be in [1, min(ell, d)]");
  const RightSvd dec = right_svd(b);
  const std::size_t d = b.cols();

  HashModel model;
  model.w = DenseMatrix(d, r);
  for (std::size_t k = 0; k < r; ++k) {
    const auto v = dec.vt.row(k);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < d; ++c) {
      if (std::abs(v[c]) > std::abs(v[arg])) arg = c;
    }
    const double sign = v[arg] < 0.0 ? -1.0 : 1.0;
    for (std::size_t c = 0; c < d; ++c) model.w(c, k) = sign * v[c];
  }
  model.mu.assign(mu.begin(), mu.end());
  return model;
}

FroshTrainer::FroshTrainer(const TrainConfig& cfg, std::size_t d)
    : cfg_(cfg.resolved(d)), centerer_(d), sketcher_(cfg_, d) {}

std::optional<HashModel> FroshTrainer::feed(const DenseMatrix& chunk) {
  if (chunk.cols() != d()) {
    throw ArgumentError("train: chunk has " + std::to_string(chunk.cols()) + " columns, expected " +
                        std::to_string(d()));
  }
  sketcher_.insert(centerer_.center_chunk(chunk));
  ++chunks_;
  if (chunks_ % cfg_.eta != 0) return std::nullopt;
  return current_model();
}

HashModel FroshTrainer::current_model() const {
  return model_from_sketch(sketcher_.snapshot(), centerer_.phi(), cfg_.bits);
}

std::vector<HashModel> train_stream(std::span<const DenseMatrix> chunks, const TrainConfig& cfg) {
  std::vector<HashModel> models;
  if (chunks.empty()) return models;
  FroshTrainer trainer(cfg, chunks.front().cols());
  for (const auto& chunk : chunks) {
    if (auto model = trainer.feed(chunk)) models.push_back(std::move(*model));
  }
  return models;
}

std::vector<DenseMatrix> split_chunks(const DenseMatrix& a, std::size_t chunk_rows) {
  require(chunk_rows >= 1, "chunk size must be >= 1");
  std::vector<DenseMatrix> out;
  for (std::size_t begin = 0; begin < a.rows(); begin += chunk_rows) {
    out.push_back(a.slice_rows(begin, std::min(a.rows(), begin + chunk_rows)));
  }
  return out;
}

BinaryCodes hash(const HashModel& model, const DenseMatrix& rows) {
  if (rows.cols() != model.d()) {
    throw ArgumentError("hash: rows have " + std::to_string(rows.cols()) + " columns, model expects " +
                        std::to_string(model.d()));
  }
  const std::size_t n = rows.rows();
  const std::size_t r = model.r();
  BinaryCodes codes(n, r);
  if (n == 0) return codes;

  const Eigen::Map<const Eigen::RowVectorXd> mu(model.mu.data(), static_cast<Eigen::Index>(model.mu.size()));
  RowMatrix centered = rows.map().rowwise() - mu;
  RowMatrix proj = centered * model.w.map();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < r; ++k) {
      if (proj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) >= 0.0) codes.set_bit(i, k);
    }
  }
  return codes;
}

HashModel lsh_model(std::size_t d, std::size_t r, std::uint64_t seed) {
  require(r >= 1, "lsh: r must be >= 1");
  require(r <= d, "lsh: r (" + std::to_string(r) + ") must not exceed d (" + std::to_string(d) + ")");
  Rng rng(seed);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
  HashModel model;
  model.w = DenseMatrix::from_eigen(q);
  model.mu.assign(d, 0.0);
  return model;
}

std::size_t hamming_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::size_t dist = 0;
  for (std::size_t w = 0; w < a.size(); ++w) dist += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
  return dist;
}

std::vector<std::uint32_t> hamming_rank(std::span<const std::uint64_t> query, const BinaryCodes& db) {
  require(query.size() == db.words_per_code(), "hamming_rank: code length mismatch");
  // Counting sort on distance keeps index order within ties.
  const std::size_t n = db.n();
  std::vector<std::uint32_t> dist(n);
  std::vector<std::size_t> bucket(db.r() + 2, 0);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = static_cast<std::uint32_t>(hamming_distance(query, db.code(i)));
    ++bucket[dist[i] + 1];
  }
  for (std::size_t b = 1; b < bucket.size(); ++b) bucket[b] += bucket[b - 1];
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[bucket[dist[i]]++] = static_cast<std::uint32_t>(i);
  return order;
}

} // namespace frosketch
