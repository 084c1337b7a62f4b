#include "mixmate/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace mixmate {

namespace {

constexpr int kMaxAssignmentSize = 64;

void check_pair(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
  if (pred.empty()) throw std::invalid_argument("label vectors are empty");
}

struct Table {
  Eigen::MatrixXd counts;
  Eigen::VectorXd rows;
  Eigen::VectorXd cols;
  double n = 0.0;
};

Table table(std::span<const int> pred, std::span<const int> truth) {
  check_pair(pred, truth);
  int kp = 0, kt = 0;
  const auto p = compact_labels(pred, &kp);
  const auto t = compact_labels(truth, &kt);
  Table out;
  out.counts = confusion(p, t, kp, kt).cast<double>();
  out.rows = out.counts.rowwise().sum();
  out.cols = out.counts.colwise().sum().transpose();
  out.n = static_cast<double>(pred.size());
  return out;
}

double entropy(const Eigen::VectorXd& counts, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0.0) h -= (counts[i] / n) * std::log(counts[i] / n);
  }
  return h;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

}  // namespace

Eigen::MatrixXi confusion(std::span<const int> pred, std::span<const int> truth, int pred_classes,
                          int truth_classes) {
  check_pair(pred, truth);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(pred_classes, truth_classes);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= pred_classes || truth[i] < 0 || truth[i] >= truth_classes) {
      throw std::invalid_argument("confusion: label out of range");
    }
    ++counts(pred[i], truth[i]);
  }
  return counts;
}

std::vector<int> compact_labels(std::span<const int> labels, int* classes) {
  std::unordered_map<int, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int label : labels) {
    auto [it, inserted] = ids.try_emplace(label, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  if (classes) *classes = static_cast<int>(ids.size());
  return out;
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
  const Table t = table(pred, truth);
  const double hp = entropy(t.rows, t.n);
  const double ht = entropy(t.cols, t.n);
  if (hp == 0.0 || ht == 0.0) {
    // A constant partition carries no information unless both are constant.
    return (hp == 0.0 && ht == 0.0) ? 1.0 : 0.0;
  }
  double mi = 0.0;
  for (Eigen::Index i = 0; i < t.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.counts.cols(); ++j) {
      const double nij = t.counts(i, j);
      if (nij > 0.0) mi += (nij / t.n) * std::log(t.n * nij / (t.rows[i] * t.cols[j]));
    }
  }
  return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

double ari(std::span<const int> pred, std::span<const int> truth) {
  const Table t = table(pred, truth);
  double index = 0.0;
  for (Eigen::Index i = 0; i < t.counts.size(); ++i) index += choose2(t.counts.data()[i]);
  double sum_rows = 0.0, sum_cols = 0.0;
  for (Eigen::Index i = 0; i < t.rows.size(); ++i) sum_rows += choose2(t.rows[i]);
  for (Eigen::Index j = 0; j < t.cols.size(); ++j) sum_cols += choose2(t.cols[j]);
  const double total = choose2(t.n);
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  // Both partitions trivial in the same way (all singletons or one block).
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

double acc(std::span<const int> pred, std::span<const int> truth) {
  const Table t = table(pred, truth);
  const Eigen::Index size = std::max(t.counts.rows(), t.counts.cols());
  if (size > kMaxAssignmentSize) throw std::invalid_argument("acc: more than 64 clusters or classes");
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(size, size);
  cost.topLeftCorner(t.counts.rows(), t.counts.cols()) = -t.counts;
  const auto match = hungarian(cost);
  double matched = 0.0;
  for (Eigen::Index i = 0; i < size; ++i) matched -= cost(i, match[static_cast<std::size_t>(i)]);
  return matched / t.n;
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  // Shortest augmenting path with row/column potentials, O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("hungarian: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> owner(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    owner[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int i0 = owner[col0];
      double delta = inf;
      int col1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const int col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (owner[j] > 0) assignment[static_cast<std::size_t>(owner[j] - 1)] = j - 1;
  }
  return assignment;
}

ClusteringScores score(std::span<const int> pred, std::span<const int> truth) {
  return {nmi(pred, truth), ari(pred, truth), acc(pred, truth)};
}

}  // namespace mixmate
