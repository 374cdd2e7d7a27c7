#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "frosketch/fd_sketch.hpp"
#include "frosketch/matrix.hpp"
#include "frosketch/srht.hpp"

namespace frosketch {

/// Faster Frequent Directions.
///
/// Nonzero rows are buffered until m of them are pending. A full buffer F is
/// compressed to ell/2 rows with a fresh SRHT (trial t seeded by
/// derive_seed(seed, t)), written into the free lower half of the sketch and
/// shrunk. Chunk boundaries between insert() calls never change the result.
class FfdSketcher {
public:
  /// ell even >= 2, m a power of two with m >= ell/2, d >= 1.
  FfdSketcher(std::size_t ell, std::size_t m, std::size_t d, std::uint64_t seed);

  std::size_t ell() const noexcept { return sketch_.ell(); }
  std::size_t m() const noexcept { return m_; }
  std::size_t d() const noexcept { return sketch_.d(); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t trial() const noexcept { return trial_; }
  std::size_t buffered() const noexcept { return buffered_; }

  const FdSketch& sketch() const noexcept { return sketch_; }

  /// Pending rows, buffered() x d.
  DenseMatrix buffer() const { return buffer_.slice_rows(0, buffered_); }

  void insert(const DenseMatrix& rows);
  void insert_row(std::span<const double> row);

  /// Flushes pending rows into the sketch by plain FD insertion (no SRHT on
  /// a partial buffer) and returns B. Idempotent until new rows arrive.
  const DenseMatrix& finalize();

  /// finalize() on a copy; this sketcher is left untouched.
  DenseMatrix snapshot() const;

  /// Peak transform workspace (rows of width d) seen across compressions.
  const WorkspaceProbe& workspace() const noexcept { return probe_; }

  /// Rebuilds a sketcher from checkpointed parts.
  static FfdSketcher restore(FdSketch sketch, std::size_t m, std::uint64_t seed, std::uint64_t trial,
                             const DenseMatrix& pending);

  bool operator==(const FfdSketcher& other) const {
    return m_ == other.m_ && seed_ == other.seed_ && trial_ == other.trial_ && buffered_ == other.buffered_ &&
           sketch_ == other.sketch_ && buffer() == other.buffer();
  }

private:
  void compress();

  std::size_t m_;
  std::uint64_t seed_;
  std::uint64_t trial_ = 0;
  std::size_t buffered_ = 0;
  DenseMatrix buffer_;
  FdSketch sketch_;
  WorkspaceProbe probe_;
};

} // namespace frosketch
