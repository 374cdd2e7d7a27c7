#include "frosketch/centering.hpp"

#include <cmath>
#include <string>

#include "frosketch/error.hpp"

namespace frosketch {

std::vector<double> correction_row(std::span<const double> phi, std::uint64_t tau,
                                   std::span<const double> chunk_mean, std::uint64_t count) {
  require(phi.size() == chunk_mean.size(), "correction row: dimension mismatch");
  const double t = static_cast<double>(tau);
  const double h = static_cast<double>(count);
  const double w = std::sqrt(t * h / (t + h));
  std::vector<double> out(phi.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = w * (chunk_mean[c] - phi[c]);
  return out;
}

void merge_mean(std::vector<double>& phi, std::uint64_t tau, std::span<const double> chunk_mean,
                std::uint64_t count) {
  require(phi.size() == chunk_mean.size(), "mean update: dimension mismatch");
  const double t = static_cast<double>(tau);
  const double h = static_cast<double>(count);
  const double total = t + h;
  for (std::size_t c = 0; c < phi.size(); ++c) phi[c] = t * phi[c] / total + h * chunk_mean[c] / total;
}

std::vector<double> row_mean(const DenseMatrix& a) {
  require(a.rows() >= 1, "row mean of an empty matrix");
  std::vector<double> mu(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t c = 0; c < mu.size(); ++c) mu[c] += r[c];
  }
  const double n = static_cast<double>(a.rows());
  for (double& v : mu) v /= n;
  return mu;
}

OnlineCenterer::OnlineCenterer(std::size_t d) : phi_(d, 0.0) { require(d >= 1, "centering needs d >= 1"); }

DenseMatrix OnlineCenterer::center_chunk(const DenseMatrix& a) {
  if (a.rows() == 0) throw ArgumentError("center_chunk: empty chunk");
  if (a.cols() != d()) {
    throw ArgumentError("center_chunk: chunk has " + std::to_string(a.cols()) + " columns, expected " +
                        std::to_string(d()));
  }
  const std::vector<double> mu = row_mean(a);
  const std::uint64_t h = a.rows();
  const bool first = tau_ == 0;

  DenseMatrix g(first ? h : h + 1, d());
  for (std::size_t i = 0; i < h; ++i) {
    const auto src = a.row(i);
    auto dst = g.row(i);
    for (std::size_t c = 0; c < d(); ++c) dst[c] = src[c] - mu[c];
  }

  if (first) {
    phi_ = mu;
    tau_ = h;
    return g;
  }

  const auto corr = correction_row(phi_, tau_, mu, h);
  std::copy(corr.begin(), corr.end(), g.row(h).begin());
  merge_mean(phi_, tau_, mu, h);
  tau_ += h;
  return g;
}

} // namespace frosketch
