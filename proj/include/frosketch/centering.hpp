#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "frosketch/matrix.hpp"

namespace frosketch {

/// Correction row appended when a chunk of `count` rows with mean `chunk_mean`
/// joins `tau` earlier rows with mean `phi`:
///   sqrt(tau*count / (tau+count)) * (chunk_mean - phi)
std::vector<double> correction_row(std::span<const double> phi, std::uint64_t tau,
                                   std::span<const double> chunk_mean, std::uint64_t count);

/// phi <- (tau*phi + count*chunk_mean) / (tau + count)
void merge_mean(std::vector<double>& phi, std::uint64_t tau, std::span<const double> chunk_mean,
                std::uint64_t count);

std::vector<double> row_mean(const DenseMatrix& a);

/// Online centering of a chunk stream.
///
/// The stacked outputs G satisfy GᵀG = (A - μ)ᵀ(A - μ) for the stacked raw
/// chunks A and their exact row mean μ, after every chunk.
class OnlineCenterer {
public:
  explicit OnlineCenterer(std::size_t d);

  std::size_t d() const noexcept { return phi_.size(); }
  std::span<const double> phi() const noexcept { return phi_; }
  std::uint64_t tau() const noexcept { return tau_; }

  /// First chunk: A - μ₁. Later chunks: [A - μⱼ; ς], one row longer.
  DenseMatrix center_chunk(const DenseMatrix& a);

private:
  std::vector<double> phi_;
  std::uint64_t tau_ = 0;
};

} // namespace frosketch
