#pragma once

#include <cstdint>
#include <filesystem>

#include "home3/problems.hpp"
#include "home3/tensor.hpp"

namespace home3 {

struct SynthLowRank {
  DenseMatrix matrix;  // left * right + noise
  DenseMatrix left;    // p x rank, standard normal entries
  DenseMatrix right;   // rank x q, standard normal entries
  double noise_sigma = 0.0;
};

// Synthetic low-rank matrix with additive Gaussian noise. By default sigma is
// 1% of the RMS of the clean product (SNR 40 dB); pass noise_sigma >= 0 to
// override. Requires rank <= min(p, q).
SynthLowRank synth_lowrank(std::size_t p, std::size_t q, std::size_t rank,
                           std::uint64_t seed, double noise_sigma = -1.0);

// Comma-separated numeric matrix; an optional header row is detected by a
// non-numeric first row. Malformed content raises with the 1-based line
// number. All values must be finite.
DenseMatrix load_csv(const std::filesystem::path& path);

// Same format with the binary {0,1} label in the last column.
LogRegProblem load_classification_csv(const std::filesystem::path& path,
                                      double l2_reg = 0.0);

void write_csv(const std::filesystem::path& path, const DenseMatrix& m);

}  // namespace home3
