#include "mixmate/numkernel.hpp"

#include <algorithm>
#include <cmath>

namespace mixmate {

namespace {

inline double shrink(double value, double alpha) {
  const double magnitude = std::abs(value) - alpha;
  if (magnitude <= 0.0) return 0.0;
  return value > 0.0 ? magnitude : -magnitude;
}

}  // namespace

Vector soft_threshold(const Vector& v, double alpha) {
  require(alpha >= 0.0, "soft_threshold: alpha must be nonnegative");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = shrink(v[i], alpha);
  return out;
}

void soft_threshold_inplace(Matrix& values, double alpha) {
  require(alpha >= 0.0, "soft_threshold: alpha must be nonnegative");
  double* data = values.data();
  const Eigen::Index count = values.size();
  for (Eigen::Index i = 0; i < count; ++i) data[i] = shrink(data[i], alpha);
}

double logsumexp(const Vector& v) {
  require(v.size() > 0, "logsumexp: empty input");
  const double peak = v.maxCoeff();
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) total += std::exp(v[i] - peak);
  return peak + std::log(total);
}

Vector softmax_neg(const Vector& v) {
  const Vector negated = -v;
  const double normalizer = logsumexp(negated);
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::exp(negated[i] - normalizer);
  return out;
}

Vector matvec(const Matrix& a, const Vector& x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  return a * x;
}

Vector matvec_transpose(const Matrix& a, const Vector& r) {
  require(a.rows() == r.size(), "matvec_transpose: dimension mismatch");
  return a.transpose() * r;
}

double frobenius(const Matrix& a) { return a.norm(); }

double l1_norm(const Vector& v) { return v.lpNorm<1>(); }

double l2_sq(const Vector& v) { return v.squaredNorm(); }

double spectral_norm_sq(const Matrix& a, int max_iterations, double tolerance) {
  if (a.size() == 0) return 0.0;
  Vector v = Vector::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = a.transpose() * (a * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double previous = estimate;
    estimate = norm;
    if (std::abs(estimate - previous) <= tolerance * estimate) break;
  }
  return estimate;
}

}  // namespace mixmate
