#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixmate/model.hpp"

namespace mixmate {

enum class InitMethod { kmeans, spectral, ssc_lite };
enum class ColumnScaling { none, unit };

const char* to_string(InitMethod method);
const char* to_string(ColumnScaling scaling);
InitMethod parse_init_method(const std::string& name);
ColumnScaling parse_column_scaling(const std::string& name);

struct InitOptions {
  InitMethod method = InitMethod::spectral;
  std::size_t subset_size = 2000;
  std::uint64_t seed = 0;
  int knn = 10;                        // spectral neighbour count
  double ssc_lambda_fraction = 0.1;    // lambda_ssc = fraction * max_j |<s_j, s_i>|
  int ssc_iterations = 100;
  int kmeans_iterations = 100;
  int embedding_restarts = 10;         // k-means restarts on spectral embeddings
  ColumnScaling column_scaling = ColumnScaling::none;
  bool auto_eta = false;               // eta = min_k 1 / (2 sigma_max(A_k)^2) after building
  int threads = 1;
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0.0;
  int iterations = 0;
};

// Uniform sample of `size` distinct indices from [0, n).
std::vector<std::size_t> sample_subset(std::size_t n, std::size_t size, std::uint64_t seed);

// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
KMeansResult kmeans(const Matrix& points, int clusters, std::uint64_t seed, int max_iterations = 100,
                    int restarts = 1);

// Symmetric binary k-nearest-neighbour graph on Euclidean distance.
Matrix knn_affinity(const Matrix& points, int neighbours);

// |C| + |C|^T for the self-expressive codes of every point against the others.
Matrix self_expressive_affinity(const Matrix& points, double lambda_fraction, int iterations, int threads = 1);

// Normalized spectral clustering of an affinity matrix: K leading eigenvectors
// of D^-1/2 W D^-1/2, rows rescaled to unit length, then k-means.
std::vector<int> spectral_clustering(const Matrix& affinity, int clusters, std::uint64_t seed,
                                     int kmeans_restarts = 10);

// K-way partition of the subset points; every part is non-empty or this throws.
std::vector<int> cluster_subset(const Matrix& points, int clusters, const InitOptions& options);

// D columns per cluster drawn from that cluster's points.
std::vector<Matrix> build_dictionaries(const Matrix& points, const std::vector<int>& partition, int clusters,
                                       int atoms, std::uint64_t seed);

// Standard deviation of the perturbation added to repeated columns.
inline constexpr double kDuplicateJitter = 1e-3;

// Full pipeline: subset, partition, dictionaries, uniform prior.
MixtureModel initialize_model(const Dataset& data, HyperParams hyper, const InitOptions& options);

}  // namespace mixmate
