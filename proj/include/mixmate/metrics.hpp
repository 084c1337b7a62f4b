#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mixmate {

// n_ij = #{samples with pred = i and truth = j}. Labels must lie in
// [0, pred_classes) and [0, truth_classes).
Eigen::MatrixXi confusion(std::span<const int> pred, std::span<const int> truth, int pred_classes,
                          int truth_classes);

// Labels remapped to 0..C-1 in order of first appearance.
std::vector<int> compact_labels(std::span<const int> labels, int* classes = nullptr);

// Mutual information normalized by sqrt(H(pred) H(truth)).
double nmi(std::span<const int> pred, std::span<const int> truth);

// Pair-counting Rand index corrected for chance.
double ari(std::span<const int> pred, std::span<const int> truth);

// Best matched fraction over one-to-one cluster-to-class assignments.
double acc(std::span<const int> pred, std::span<const int> truth);

// Minimum-cost assignment of rows to columns for a square cost matrix;
// returns the column chosen for each row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

struct ClusteringScores {
  double nmi = 0.0;
  double ari = 0.0;
  double acc = 0.0;
};

ClusteringScores score(std::span<const int> pred, std::span<const int> truth);

}  // namespace mixmate
