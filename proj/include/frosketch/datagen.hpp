#pragma once

#include <cstddef>
#include <cstdint>

#include "frosketch/matrix.hpp"

namespace frosketch {

/// A = P Λ U + Z / gamma with P ~ N(0,1)^{n x k}, Λ_ii = 1 - (i-1)/k
/// (1-indexed), U k x d with orthonormal rows and Z ~ N(0,1)^{n x d}.
struct SynthConfig {
  std::size_t n = 1000;
  std::size_t d = 64;
  std::size_t k = 10;
  double gamma = 10.0;
  std::uint64_t seed = 0;
};

DenseMatrix synth_lowrank(const SynthConfig& cfg);

/// Gaussian clusters inside a random `latent`-dimensional subspace plus
/// isotropic noise in all d coordinates. Latent coordinates: centers drawn
/// N(0, center_scale²), rows drawn around a uniformly chosen center with
/// standard deviation `spread`. Rows are i.i.d., so any suffix is a valid
/// holdout.
struct ClusterConfig {
  std::size_t n = 1000;
  std::size_t d = 64;
  std::size_t clusters = 10;
  std::size_t latent = 32;
  double center_scale = 0.5;
  double spread = 1.0;
  double noise = 0.3;
  std::uint64_t seed = 0;
};
DenseMatrix synth_clusters(const ClusterConfig& cfg);

/// ||AᵀA - BᵀB||₂ / ||A||_F², spectral norm by power iteration at tol 1e-9.
double relative_error(const DenseMatrix& a, const DenseMatrix& b);

/// Same metric from a precomputed Gram AᵀA and ||A||_F² (streaming use).
double relative_error_from_gram(const DenseMatrix& gram_a, double frobenius_sq, const DenseMatrix& b);

/// ||(A-μ)ᵀ(A-μ) - BᵀB||₂ / ||A-μ||_F² with μ the row mean of A.
double centered_relative_error(const DenseMatrix& a, const DenseMatrix& b);

} // namespace frosketch
