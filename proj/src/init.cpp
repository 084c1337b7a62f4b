#include "mixmate/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mixmate/encoder.hpp"
#include "mixmate/grad.hpp"
#include "mixmate/parallel.hpp"

namespace mixmate {

const char* to_string(InitMethod method) {
  switch (method) {
    case InitMethod::kmeans: return "kmeans";
    case InitMethod::spectral: return "spectral";
    case InitMethod::ssc_lite: return "ssc_lite";
  }
  return "?";
}

const char* to_string(ColumnScaling scaling) { return scaling == ColumnScaling::none ? "none" : "unit"; }

InitMethod parse_init_method(const std::string& name) {
  if (name == "kmeans") return InitMethod::kmeans;
  if (name == "spectral") return InitMethod::spectral;
  if (name == "ssc_lite" || name == "ssc") return InitMethod::ssc_lite;
  throw std::invalid_argument("unknown init method '" + name + "' (expected kmeans|spectral|ssc_lite)");
}

ColumnScaling parse_column_scaling(const std::string& name) {
  if (name == "none") return ColumnScaling::none;
  if (name == "unit") return ColumnScaling::unit;
  throw std::invalid_argument("unknown column scaling '" + name + "' (expected none|unit)");
}

std::vector<std::size_t> sample_subset(std::size_t n, std::size_t size, std::uint64_t seed) {
  require(size >= 1, "sample_subset: size must be >= 1");
  require(size <= n, "sample_subset: subset size exceeds dataset size");
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `size` slots end up uniformly sampled.
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(indices[i], indices[pick(rng)]);
  }
  indices.resize(size);
  return indices;
}

namespace {

// Squared distances from every point to every centroid (n x K).
Matrix squared_distances(const Matrix& points, const Matrix& centroids) {
  const Vector point_norms = points.rowwise().squaredNorm();
  const Vector centroid_norms = centroids.rowwise().squaredNorm();
  Matrix d = -2.0 * points * centroids.transpose();
  d.colwise() += point_norms;
  d.rowwise() += centroid_norms.transpose();
  return d.cwiseMax(0.0);
}

Matrix seed_plus_plus(const Matrix& points, int clusters, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Matrix centroids(clusters, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  Vector closest = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < clusters; ++c) {
    Eigen::Index chosen = 0;
    const double total = closest.sum();
    if (total > 0.0) {
      std::discrete_distribution<Eigen::Index> pick(closest.data(), closest.data() + n);
      chosen = pick(rng);
    } else {
      chosen = first(rng);
    }
    centroids.row(c) = points.row(chosen);
    closest = closest.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& points, Matrix centroids, int max_iterations) {
  const Eigen::Index n = points.rows();
  const int clusters = static_cast<int>(centroids.rows());
  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), -1);
  for (int it = 1; it <= max_iterations; ++it) {
    const Matrix d = squared_distances(points, centroids);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      d.row(i).minCoeff(&best);
      if (result.labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        result.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    result.iterations = it;
    if (!changed) break;
    Matrix sums = Matrix::Zero(clusters, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(clusters), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = result.labels[static_cast<std::size_t>(i)];
      sums.row(label) += points.row(i);
      ++counts[static_cast<std::size_t>(label)];
    }
    for (int c = 0; c < clusters; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
  }
  const Matrix d = squared_distances(points, centroids);
  result.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) result.inertia += d(i, result.labels[static_cast<std::size_t>(i)]);
  result.centroids = std::move(centroids);
  return result;
}

bool has_empty_part(const std::vector<int>& labels, int clusters) {
  std::vector<int> counts(static_cast<std::size_t>(clusters), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  return std::any_of(counts.begin(), counts.end(), [](int c) { return c == 0; });
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int clusters, std::uint64_t seed, int max_iterations, int restarts) {
  require(clusters >= 1, "kmeans: cluster count must be >= 1");
  require(points.rows() >= clusters, "kmeans: fewer points than clusters");
  require(restarts >= 1, "kmeans: restarts must be >= 1");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult candidate = lloyd(points, seed_plus_plus(points, clusters, rng), max_iterations);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

Matrix knn_affinity(const Matrix& points, int neighbours) {
  const Eigen::Index n = points.rows();
  require(neighbours >= 1, "knn_affinity: neighbour count must be >= 1");
  const Matrix d = squared_distances(points, points);
  Matrix w = Matrix::Zero(n, n);
  const auto take = std::min<Eigen::Index>(neighbours, n - 1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::swap(order[0], order[static_cast<std::size_t>(i)]);
    std::partial_sort(order.begin() + 1, order.begin() + 1 + take, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return d(i, a) < d(i, b) || (d(i, a) == d(i, b) && a < b); });
    for (Eigen::Index j = 1; j <= take; ++j) {
      const Eigen::Index other = order[static_cast<std::size_t>(j)];
      w(i, other) = 1.0;
      w(other, i) = 1.0;
    }
  }
  return w;
}

Matrix self_expressive_affinity(const Matrix& points, double lambda_fraction, int iterations, int threads) {
  const Eigen::Index n = points.rows();
  require(n >= 2, "self_expressive_affinity: need at least two points");
  require(lambda_fraction > 0.0, "self_expressive_affinity: lambda fraction must be positive");
  const Matrix gram = points * points.transpose();
  const double lipschitz = 2.0 * spectral_norm_sq(points);
  require(lipschitz > 0.0, "self_expressive_affinity: all points are zero");
  const double step = 1.0 / lipschitz;

  Matrix codes = Matrix::Zero(n, n);
  parallel_for(static_cast<int>(n), threads, [&](int i) {
    Vector target = gram.row(i).transpose();
    target[i] = 0.0;
    const double lambda = lambda_fraction * target.cwiseAbs().maxCoeff();
    Vector c = Vector::Zero(n), c_prev = Vector::Zero(n), z = Vector::Zero(n), gz(n);
    std::vector<Eigen::Index> support;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
      support.clear();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (z[j] != 0.0) support.push_back(j);
      }
      gz.setZero();
      for (Eigen::Index j : support) gz.noalias() += z[j] * gram.row(j).transpose();
      Vector next = z - step * 2.0 * (gz - target);
      next[i] = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double m = std::abs(next[j]) - step * lambda;
        next[j] = m > 0.0 ? std::copysign(m, next[j]) : 0.0;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = next + ((t - 1.0) / t_next) * (next - c);
      z[i] = 0.0;
      c_prev.swap(c);
      c = std::move(next);
      t = t_next;
    }
    codes.row(i) = c.transpose();
  });
  Matrix affinity = codes.cwiseAbs();
  affinity += codes.cwiseAbs().transpose();
  return affinity;
}

std::vector<int> spectral_clustering(const Matrix& affinity, int clusters, std::uint64_t seed, int kmeans_restarts) {
  const Eigen::Index n = affinity.rows();
  require(affinity.cols() == n, "spectral_clustering: affinity must be square");
  require(n >= clusters, "spectral_clustering: fewer points than clusters");
  Vector degree = affinity.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) degree[i] = degree[i] > 0.0 ? 1.0 / std::sqrt(degree[i]) : 0.0;
  Eigen::MatrixXd normalized = (degree.asDiagonal() * affinity * degree.asDiagonal());
  normalized = 0.5 * (normalized + normalized.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectral_clustering: eigensolver failed");
  // Largest eigenvalues of the normalized affinity = smallest of I - normalized.
  Matrix embedding = solver.eigenvectors().rightCols(clusters);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }
  return kmeans(embedding, clusters, seed, 100, kmeans_restarts).labels;
}

std::vector<int> cluster_subset(const Matrix& points, int clusters, const InitOptions& options) {
  require(clusters >= 1, "cluster_subset: cluster count must be >= 1");
  require(points.rows() >= clusters, "cluster_subset: subset smaller than cluster count");
  auto run = [&](std::uint64_t seed) -> std::vector<int> {
    switch (options.method) {
      case InitMethod::kmeans:
        return kmeans(points, clusters, seed, options.kmeans_iterations).labels;
      case InitMethod::spectral:
        return spectral_clustering(knn_affinity(points, options.knn), clusters, seed, options.embedding_restarts);
      case InitMethod::ssc_lite:
        return spectral_clustering(self_expressive_affinity(points, options.ssc_lambda_fraction,
                                                            options.ssc_iterations, options.threads),
                                   clusters, seed, options.embedding_restarts);
    }
    throw std::invalid_argument("cluster_subset: unknown method");
  };
  std::vector<int> labels = run(options.seed);
  if (!has_empty_part(labels, clusters)) return labels;
  labels = run(options.seed + 0x9E3779B97F4A7C15ULL);
  if (has_empty_part(labels, clusters)) throw std::runtime_error("degenerate partition: a cluster received no points");
  return labels;
}

std::vector<Matrix> build_dictionaries(const Matrix& points, const std::vector<int>& partition, int clusters,
                                       int atoms, std::uint64_t seed) {
  require(static_cast<Eigen::Index>(partition.size()) == points.rows(), "build_dictionaries: partition size mismatch");
  require(atoms >= 1, "build_dictionaries: atom count must be >= 1");
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const int label = partition[i];
    require(label >= 0 && label < clusters, "build_dictionaries: label out of range");
    members[static_cast<std::size_t>(label)].push_back(static_cast<Eigen::Index>(i));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, kDuplicateJitter);
  std::vector<Matrix> dictionaries;
  dictionaries.reserve(static_cast<std::size_t>(clusters));
  for (int k = 0; k < clusters; ++k) {
    auto& pool = members[static_cast<std::size_t>(k)];
    if (pool.empty()) throw std::runtime_error("build_dictionaries: cluster " + std::to_string(k) + " is empty");
    std::shuffle(pool.begin(), pool.end(), rng);
    Matrix a(points.cols(), atoms);
    const auto distinct = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(atoms));
    for (std::size_t j = 0; j < distinct; ++j) a.col(static_cast<Eigen::Index>(j)) = points.row(pool[j]).transpose();
    // Too few points: repeat members, nudged off the original within 3 sigma.
    std::uniform_int_distribution<std::size_t> any(0, pool.size() - 1);
    for (std::size_t j = distinct; j < static_cast<std::size_t>(atoms); ++j) {
      Vector column = points.row(pool[any(rng)]).transpose();
      for (Eigen::Index m = 0; m < column.size(); ++m) {
        double e = 0.0;
        do {
          e = jitter(rng);
        } while (std::abs(e) > 3.0 * kDuplicateJitter);
        column[m] += e;
      }
      a.col(static_cast<Eigen::Index>(j)) = column;
    }
    dictionaries.push_back(std::move(a));
  }
  return dictionaries;
}

MixtureModel initialize_model(const Dataset& data, HyperParams hyper, const InitOptions& options) {
  require(data.size() >= 1, "initialize_model: empty dataset");
  hyper.dim = data.dim();
  const auto rows = sample_subset(data.size(), options.subset_size, options.seed);
  Matrix subset(static_cast<Eigen::Index>(rows.size()), data.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    subset.row(static_cast<Eigen::Index>(i)) = data.samples.row(static_cast<Eigen::Index>(rows[i]));
  }
  const auto partition = cluster_subset(subset, hyper.clusters, options);

  MixtureModel model = make_model(hyper);
  model.dictionaries = build_dictionaries(subset, partition, hyper.clusters, hyper.atoms, options.seed + 1);
  if (options.column_scaling == ColumnScaling::unit) normalize_columns(model.dictionaries);
  if (options.auto_eta) model.hyper.eta = auto_step_size(model.dictionaries);
  require_valid(model);
  return model;
}

}  // namespace mixmate
