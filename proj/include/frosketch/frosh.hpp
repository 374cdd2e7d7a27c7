#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "frosketch/centering.hpp"
#include "frosketch/fd_sketch.hpp"
#include "frosketch/ffd_sketch.hpp"
#include "frosketch/matrix.hpp"

namespace frosketch {

enum class SketchMethod { fd, ffd };

/// Zero-valued sizes resolve against the data dimension: ell = 2*bits,
/// m = next power of two >= 4d, chunk_rows = m.
struct TrainConfig {
  std::size_t bits = 32;
  std::size_t ell = 0;
  std::size_t m = 0;
  std::size_t eta = 1;
  std::size_t chunk_rows = 0;
  std::uint64_t seed = 0;
  SketchMethod sketcher = SketchMethod::ffd;

  /// Fills defaults and validates; throws ArgumentError on bad combinations.
  TrainConfig resolved(std::size_t d) const;
};

/// Hash functions h_k(a) = sgn((a - mu) w_k), sgn(0) = +1.
struct HashModel {
  DenseMatrix w; // d x r, orthonormal columns
  std::vector<double> mu;

  std::size_t d() const noexcept { return w.rows(); }
  std::size_t r() const noexcept { return w.cols(); }

  bool operator==(const HashModel&) const = default;
};

/// Packed codes, one row of ceil(r/64) words per sample; bit k of a code is
/// bit k%64 of word k/64. Padding bits are zero.
class BinaryCodes {
public:
  BinaryCodes() = default;
  BinaryCodes(std::size_t n, std::size_t r);

  std::size_t n() const noexcept { return n_; }
  std::size_t r() const noexcept { return r_; }
  std::size_t words_per_code() const noexcept { return words_; }

  std::span<const std::uint64_t> code(std::size_t i) const { return {bits_.data() + i * words_, words_}; }
  std::span<std::uint64_t> code(std::size_t i) { return {bits_.data() + i * words_, words_}; }

  bool bit(std::size_t i, std::size_t k) const { return (code(i)[k / 64] >> (k % 64)) & 1U; }
  void set_bit(std::size_t i, std::size_t k) { code(i)[k / 64] |= std::uint64_t{1} << (k % 64); }

  bool operator==(const BinaryCodes&) const = default;

private:
  std::size_t n_ = 0;
  std::size_t r_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Either sketcher behind one interface; FD gives the OSH baseline, FFD gives
/// FROSH.
class StreamSketcher {
public:
  StreamSketcher(const TrainConfig& resolved, std::size_t d);

  SketchMethod method() const noexcept;
  void insert(const DenseMatrix& rows);

  /// Current sketch with any pending FFD rows flushed into a copy.
  DenseMatrix snapshot() const;

  /// Flushes pending rows into the live sketch and returns it.
  DenseMatrix finalize();

  const std::variant<FdSketch, FfdSketcher>& impl() const noexcept { return impl_; }

private:
  std::variant<FdSketch, FfdSketcher> impl_;
};

/// Top-r right singular vectors of b as columns of w, each flipped so its
/// largest-magnitude entry is positive.
HashModel model_from_sketch(const DenseMatrix& b, std::span<const double> mu, std::size_t r);

/// Online trainer: centering, then sketching, with a model every eta chunks.
class FroshTrainer {
public:
  FroshTrainer(const TrainConfig& cfg, std::size_t d);

  const TrainConfig& config() const noexcept { return cfg_; }
  std::size_t d() const noexcept { return centerer_.d(); }
  std::size_t chunks_seen() const noexcept { return chunks_; }
  const OnlineCenterer& centering() const noexcept { return centerer_; }
  const StreamSketcher& sketcher() const noexcept { return sketcher_; }

  /// Returns a model when this chunk completes a group of eta chunks;
  /// training continues either way.
  std::optional<HashModel> feed(const DenseMatrix& chunk);

  /// Model for everything fed so far (pending FFD rows flushed on a copy).
  HashModel current_model() const;

  /// Flushes the live sketcher; used when training is over.
  DenseMatrix finalize_sketch() { return sketcher_.finalize(); }

private:
  TrainConfig cfg_;
  OnlineCenterer centerer_;
  StreamSketcher sketcher_;
  std::size_t chunks_ = 0;
};

/// Runs FroshTrainer over the chunks and returns every emitted model.
std::vector<HashModel> train_stream(std::span<const DenseMatrix> chunks, const TrainConfig& cfg);

/// Splits rows into consecutive chunks of chunk_rows (last one shorter).
std::vector<DenseMatrix> split_chunks(const DenseMatrix& a, std::size_t chunk_rows);

BinaryCodes hash(const HashModel& model, const DenseMatrix& rows);

/// Random Gaussian projection, orthonormalized, mu = 0. Requires 1 <= r <= d.
HashModel lsh_model(std::size_t d, std::size_t r, std::uint64_t seed);

std::size_t hamming_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// Database indices sorted by Hamming distance to the query, ties by index.
std::vector<std::uint32_t> hamming_rank(std::span<const std::uint64_t> query, const BinaryCodes& db);

} // namespace frosketch
