#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mixmate/encoder.hpp"
#include "mixmate/model.hpp"

namespace mixmate {

// Per-cluster energies of one sample: total = recon + reg + bias.
struct EnergyVector {
  Vector total;
  Vector recon;  // ||y - A_k x_k||^2 over observed coordinates
  Vector reg;    // lambda ||x_k||_1
  Vector bias;   // -log pi_k
};

struct Assignment {
  Vector weights;      // posterior p(z = k | y)
  int hard_label = 0;  // lowest-energy cluster, ties to the lowest index
};

EnergyVector energies(const Sample& sample, const MixtureModel& model, std::span<const EncodeResult> codes);

Assignment posterior(const EnergyVector& e);

// sum_k w_k E_k with w = softmax(-E).
double loss(const EnergyVector& e);

// Arithmetic mean of the per-sample losses.
double batch_loss(std::span<const EnergyVector> batch);

// Everything the backward pass needs for one minibatch. Matrices indexed
// [sample, cluster] are B x K.
struct ForwardPass {
  std::vector<BatchEncoding> encodings;  // one per cluster
  Matrix recon;
  Matrix reg;
  Vector bias;
  Matrix total;
  Matrix weights;
  std::vector<int> labels;
  Vector sample_loss;
  double mean_loss = 0.0;
};

// observed: B x M 0/1 matrix, or empty for fully observed data.
ForwardPass forward(const Matrix& y, const Matrix& observed, const MixtureModel& model, int threads = 1);

// Selected dataset rows as a dense batch. observed comes back empty when the
// dataset carries no masks.
void gather_batch(const Dataset& data, std::span<const std::size_t> rows, Matrix& y, Matrix& observed);

struct ClusterReport {
  std::vector<int> labels;
  Matrix weights;          // n x K
  Matrix mse;              // n x K, recon / M (masked coordinates contribute zero)
  Eigen::MatrixXi nonzeros;  // n x K, l0 of each code
  Vector sample_loss;      // n
  double mean_loss = 0.0;
};

ClusterReport cluster_dataset(const Dataset& data, const MixtureModel& model, int threads = 1,
                              std::size_t chunk = 512);

// sample_index, hard_label, weight_k..., mse_k..., l0_k...
void write_assignments_csv(const ClusterReport& report, const std::filesystem::path& path);

}  // namespace mixmate
