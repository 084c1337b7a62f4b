#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mixmate {

// Dense row-major storage for dictionaries and sample batches. Sparse codes
// are kept dense; sparsity shows up as exact zeros from soft-thresholding.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Elementwise sign(v) * max(|v| - alpha, 0). Throws on alpha < 0.
Vector soft_threshold(const Vector& v, double alpha);

// In-place batch form used by the encoder.
void soft_threshold_inplace(Matrix& values, double alpha);

// log(sum(exp(v))) shifted by max(v). Throws on empty input.
double logsumexp(const Vector& v);

// exp(-v_i - logsumexp(-v)): the posterior weights for energies v.
Vector softmax_neg(const Vector& v);

Vector matvec(const Matrix& a, const Vector& x);
Vector matvec_transpose(const Matrix& a, const Vector& r);
double frobenius(const Matrix& a);
double l1_norm(const Vector& v);
double l2_sq(const Vector& v);

// Largest squared singular value of a, by power iteration on a^T a.
double spectral_norm_sq(const Matrix& a, int max_iterations = 500, double tolerance = 1e-10);

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace mixmate
