#include "frosketch/datagen.hpp"

#include <string>

#include "frosketch/centering.hpp"
#include "frosketch/error.hpp"
#include "frosketch/rng.hpp"

namespace frosketch {

namespace {

// d x k with orthonormal columns, from the QR of a Gaussian draw.
Eigen::MatrixXd random_basis(Eigen::Index d, Eigen::Index k, Rng& rng) {
  Eigen::MatrixXd g(d, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
}

} // namespace

DenseMatrix synth_lowrank(const SynthConfig& cfg) {
  require(cfg.k >= 1 && cfg.k <= cfg.d, "synth: need 1 <= k <= d (k=" + std::to_string(cfg.k) +
                                            ", d=" + std::to_string(cfg.d) + ")");
  require(cfg.gamma > 0.0, "synth: gamma must be positive");
  require(cfg.n >= 1, "synth: n must be >= 1");
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto d = static_cast<Eigen::Index>(cfg.d);
  const auto k = static_cast<Eigen::Index>(cfg.k);

  // Separate streams so changing n leaves the signal space unchanged.
  Rng basis_rng(derive_seed(cfg.seed, 1));
  Rng coeff_rng(derive_seed(cfg.seed, 2));
  Rng noise_rng(derive_seed(cfg.seed, 3));

  const Eigen::MatrixXd basis = random_basis(d, k, basis_rng); // Uᵀ

  RowMatrix p(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double lambda = 1.0 - static_cast<double>(j) / static_cast<double>(k);
      p(i, j) = coeff_rng.normal() * lambda;
    }
  }

  DenseMatrix a(cfg.n, cfg.d);
  auto out = a.map();
  out.noalias() = p * basis.transpose();
  const double inv_gamma = 1.0 / cfg.gamma;
  for (double& v : a.data()) v += noise_rng.normal() * inv_gamma;
  return a;
}

DenseMatrix synth_clusters(const ClusterConfig& cfg) {
  require(cfg.clusters >= 1, "clusters must be >= 1");
  require(cfg.n >= 1 && cfg.d >= 1, "cluster data needs n, d >= 1");
  require(cfg.latent >= 1 && cfg.latent <= cfg.d, "clusters: need 1 <= latent <= d (latent=" +
                                                      std::to_string(cfg.latent) + ", d=" + std::to_string(cfg.d) + ")");
  require(cfg.spread >= 0.0 && cfg.center_scale >= 0.0 && cfg.noise >= 0.0, "cluster scales must be non-negative");
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto latent = static_cast<Eigen::Index>(cfg.latent);

  Rng basis_rng(derive_seed(cfg.seed, 10));
  Rng center_rng(derive_seed(cfg.seed, 11));
  Rng row_rng(derive_seed(cfg.seed, 12));
  Rng noise_rng(derive_seed(cfg.seed, 13));

  const Eigen::MatrixXd basis = random_basis(static_cast<Eigen::Index>(cfg.d), latent, basis_rng);
  RowMatrix centers(static_cast<Eigen::Index>(cfg.clusters), latent);
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    for (Eigen::Index j = 0; j < latent; ++j) centers(c, j) = center_rng.normal() * cfg.center_scale;
  }

  RowMatrix z(n, latent);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(row_rng.uniform_below(cfg.clusters));
    for (Eigen::Index j = 0; j < latent; ++j) z(i, j) = centers(c, j) + cfg.spread * row_rng.normal();
  }

  DenseMatrix a(cfg.n, cfg.d);
  a.map().noalias() = z * basis.transpose();
  for (double& v : a.data()) v += cfg.noise * noise_rng.normal();
  return a;
}

double relative_error_from_gram(const DenseMatrix& gram_a, double frobenius_sq, const DenseMatrix& b) {
  require(gram_a.rows() == b.cols() && gram_a.cols() == b.cols(), "relative error: dimension mismatch");
  if (frobenius_sq == 0.0) return 0.0;
  DenseMatrix diff = gram_a;
  diff.map() -= gram(b).map();
  return spectral_norm(diff, 1e-9) / frobenius_sq;
}

double relative_error(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.cols(), "relative error: column mismatch");
  return relative_error_from_gram(gram(a), a.frobenius_norm_squared(), b);
}

double centered_relative_error(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.cols(), "relative error: column mismatch");
  const auto mu = row_mean(a);
  DenseMatrix centered = a;
  for (std::size_t i = 0; i < centered.rows(); ++i) {
    auto r = centered.row(i);
    for (std::size_t c = 0; c < r.size(); ++c) r[c] -= mu[c];
  }
  return relative_error(centered, b);
}

} // namespace frosketch
