#include "mixmate/encoder.hpp"

#include <cmath>
#include <limits>

namespace mixmate {

double sparse_objective(const Vector& y, const Matrix& a, const Vector& x, double lambda) {
  require(a.rows() == y.size() && a.cols() == x.size(), "sparse_objective: shape mismatch");
  return l2_sq(y - a * x) + lambda * l1_norm(x);
}

Vector ista_step(const Vector& x_prev, const Vector& y, const Matrix& a, double eta, double lambda,
                 StepRule rule) {
  require(a.rows() == y.size() && a.cols() == x_prev.size(), "ista_step: shape mismatch");
  require(eta > 0.0, "ista_step: eta must be positive");
  const double gain = rule == StepRule::full_quadratic ? 2.0 * eta : eta;
  const Vector argument = x_prev + gain * (a.transpose() * (y - a * x_prev));
  return soft_threshold(argument, eta * lambda);
}

std::vector<double> momentum_schedule(int iterations) {
  std::vector<double> coefficients(static_cast<std::size_t>(std::max(iterations, 0)), 0.0);
  double t_prev = 1.0;  // t_1
  for (int l = 2; l <= iterations; ++l) {
    const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    coefficients[static_cast<std::size_t>(l - 1)] = (t_prev - 1.0) / t;
    t_prev = t;
  }
  return coefficients;
}

BatchEncoding encode_batch(const Matrix& y, const Matrix& observed, const Matrix& a, const HyperParams& hyper) {
  require(a.rows() == y.cols(), "encode: dictionary rows do not match data dimension");
  const bool masked = observed.size() > 0;
  if (masked) require(observed.rows() == y.rows() && observed.cols() == y.cols(), "encode: mask shape mismatch");
  require(hyper.eta > 0.0, "encode: eta must be positive");
  require(hyper.iterations >= 1, "encode: iteration count must be >= 1");

  const Eigen::Index batch = y.rows();
  const Eigen::Index atoms = a.cols();
  const double gain = hyper.data_gain();
  const double threshold = hyper.threshold();
  const auto coefficients = momentum_schedule(hyper.iterations);

  BatchEncoding out;
  out.trace.pre_threshold.reserve(static_cast<std::size_t>(hyper.iterations));
  out.trace.extrapolation.reserve(static_cast<std::size_t>(hyper.iterations));

  Matrix x = Matrix::Zero(batch, atoms);
  Matrix x_prev = x;
  Matrix residual(batch, y.cols());
  for (int l = 1; l <= hyper.iterations; ++l) {
    const double c = hyper.solver == Solver::fista ? coefficients[static_cast<std::size_t>(l - 1)] : 0.0;
    Matrix point = x;
    if (c != 0.0) point.noalias() += c * (x - x_prev);

    residual = y;
    residual.noalias() -= point * a.transpose();
    if (masked) residual.array() *= observed.array();
    Matrix argument = point;
    argument.noalias() += gain * (residual * a);

    x_prev.swap(x);
    x = argument;
    soft_threshold_inplace(x, threshold);
    if (!x.allFinite()) {
      throw NumericDivergence("encoder iterate became non-finite at iteration " + std::to_string(l) +
                                  " (step size eta=" + std::to_string(hyper.eta) + " is likely too large)",
                              l);
    }
    out.trace.pre_threshold.push_back(std::move(argument));
    out.trace.extrapolation.push_back(std::move(point));
    out.trace.momentum.push_back(c);
  }
  out.codes = std::move(x);
  return out;
}

namespace {

EncodeResult single_result(BatchEncoding&& batch, const Vector& y_full, const Matrix& observed, const Matrix& a,
                           double lambda) {
  EncodeResult result;
  result.code = batch.codes.row(0).transpose();
  result.trace.reserve(batch.trace.momentum.size());
  for (std::size_t l = 0; l < batch.trace.momentum.size(); ++l) {
    result.trace.push_back({batch.trace.pre_threshold[l].row(0).transpose(),
                            batch.trace.extrapolation[l].row(0).transpose(), batch.trace.momentum[l]});
  }
  Vector residual = y_full - a * result.code;
  if (observed.size() > 0) residual.array() *= observed.row(0).transpose().array();
  result.objective = l2_sq(residual) + lambda * l1_norm(result.code);
  return result;
}

}  // namespace

EncodeResult encode(const Vector& y, const Matrix& a, const HyperParams& hyper) {
  require(a.rows() == y.size(), "encode: dictionary rows do not match data dimension");
  const Matrix row = y.transpose();
  const Matrix none;
  return single_result(encode_batch(row, none, a, hyper), y, none, a, hyper.lambda);
}

EncodeResult encode_masked(const Vector& y_observed, const std::vector<bool>& mask, const Matrix& a,
                           const HyperParams& hyper) {
  require(static_cast<Eigen::Index>(mask.size()) == a.rows(), "encode_masked: mask length must equal M");
  Eigen::Index observed_count = 0;
  for (bool m : mask) observed_count += m ? 1 : 0;
  require(observed_count > 0, "encode_masked: mask has no observed coordinates");
  require(observed_count == y_observed.size(), "encode_masked: observed value count does not match mask");

  Vector y_full = Vector::Zero(a.rows());
  Matrix observed(1, a.rows());
  Eigen::Index next = 0;
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    const bool seen = mask[static_cast<std::size_t>(j)];
    observed(0, j) = seen ? 1.0 : 0.0;
    if (seen) y_full[j] = y_observed[next++];
  }
  return single_result(encode_batch(y_full.transpose(), observed, a, hyper), y_full, observed, a, hyper.lambda);
}

double auto_step_size(const std::vector<Matrix>& dictionaries) {
  double step = std::numeric_limits<double>::infinity();
  for (const Matrix& a : dictionaries) {
    const double s = spectral_norm_sq(a);
    if (s > 0.0) step = std::min(step, 1.0 / (2.0 * s));
  }
  require(std::isfinite(step), "auto_step_size: all dictionaries are zero");
  return step;
}

}  // namespace mixmate
