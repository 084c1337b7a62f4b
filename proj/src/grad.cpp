#include "mixmate/grad.hpp"

#include <cmath>

#include "mixmate/parallel.hpp"

namespace mixmate {

const char* to_string(AttentionGrad mode) { return mode == AttentionGrad::full ? "full" : "stop"; }

AttentionGrad parse_attention_grad(const std::string& name) {
  if (name == "full") return AttentionGrad::full;
  if (name == "stop") return AttentionGrad::stop;
  throw std::invalid_argument("unknown attention gradient mode '" + name + "' (expected full|stop)");
}

namespace {

void check_artifacts(const Matrix& y, const Matrix& observed, const MixtureModel& model, const ForwardPass& fp) {
  const HyperParams& h = model.hyper;
  const Eigen::Index batch = y.rows();
  if (y.cols() != h.dim) throw InvalidState("backward: batch dimension does not match model");
  if (observed.size() > 0 && (observed.rows() != batch || observed.cols() != h.dim)) {
    throw InvalidState("backward: mask shape does not match batch");
  }
  if (static_cast<int>(fp.encodings.size()) != h.clusters || fp.total.rows() != batch ||
      fp.total.cols() != h.clusters || fp.weights.rows() != batch) {
    throw InvalidState("backward: forward artifacts do not match this batch/model");
  }
  for (const auto& enc : fp.encodings) {
    const auto& t = enc.trace;
    if (static_cast<int>(t.momentum.size()) != h.iterations || t.pre_threshold.size() != t.momentum.size() ||
        t.extrapolation.size() != t.momentum.size()) {
      throw InvalidState("backward: missing or incomplete encoder trace");
    }
    if (enc.codes.rows() != batch || enc.codes.cols() != h.atoms) {
      throw InvalidState("backward: code shape does not match batch/model");
    }
    for (std::size_t l = 0; l < t.momentum.size(); ++l) {
      if (t.pre_threshold[l].rows() != batch || t.pre_threshold[l].cols() != h.atoms ||
          t.extrapolation[l].rows() != batch || t.extrapolation[l].cols() != h.atoms) {
        throw InvalidState("backward: encoder trace shape does not match batch/model");
      }
    }
  }
}

// Reverse pass for one cluster. energy_grad[b] = dL/dE_k for sample b.
Matrix cluster_backward(const Matrix& y, const Matrix& observed, const Matrix& a, const BatchEncoding& enc,
                        const Vector& energy_grad, const HyperParams& h) {
  const bool masked = observed.size() > 0;
  const double gain = h.data_gain();
  const double threshold = h.threshold();
  const int iterations = h.iterations;

  // Decoder: E = ||mask (y - A x)||^2 + lambda ||x||_1.
  Matrix residual = y;
  residual.noalias() -= enc.codes * a.transpose();
  if (masked) residual.array() *= observed.array();
  Matrix weighted = residual.array().colwise() * energy_grad.array();

  Matrix d_a(a.rows(), a.cols());
  d_a.noalias() = -2.0 * weighted.transpose() * enc.codes;

  std::vector<Matrix> d_x(static_cast<std::size_t>(iterations) + 1);
  Matrix& top = d_x[static_cast<std::size_t>(iterations)];
  top.noalias() = -2.0 * weighted * a;
  top.array() += h.lambda * (enc.codes.array().sign().colwise() * energy_grad.array());

  Matrix d_u, a_du, d_z;
  for (int l = iterations; l >= 1; --l) {
    const auto idx = static_cast<std::size_t>(l - 1);
    Matrix& upstream = d_x[static_cast<std::size_t>(l)];
    if (upstream.size() == 0) continue;
    const Matrix& argument = enc.trace.pre_threshold[idx];
    const Matrix& point = enc.trace.extrapolation[idx];
    const double c = enc.trace.momentum[idx];

    d_u = (argument.array().abs() > threshold).select(upstream, 0.0);

    residual = y;
    residual.noalias() -= point * a.transpose();
    if (masked) residual.array() *= observed.array();
    a_du.noalias() = d_u * a.transpose();
    if (masked) a_du.array() *= observed.array();

    // argument = point + gain * A^T mask (y - A point)
    d_a.noalias() += gain * (residual.transpose() * d_u);
    d_a.noalias() -= gain * (a_du.transpose() * point);
    d_z = d_u;
    d_z.noalias() -= gain * (a_du * a);

    // point = (1 + c) x^{l-1} - c x^{l-2}; x^0 = 0 is a constant.
    if (l - 1 >= 1) {
      Matrix& prev = d_x[idx];
      if (prev.size() == 0) prev = Matrix::Zero(d_z.rows(), d_z.cols());
      prev.noalias() += (1.0 + c) * d_z;
    }
    if (c != 0.0 && l - 2 >= 1) {
      Matrix& prev2 = d_x[idx - 1];
      if (prev2.size() == 0) prev2 = Matrix::Zero(d_z.rows(), d_z.cols());
      prev2.noalias() -= c * d_z;
    }
    upstream.resize(0, 0);
  }
  return d_a;
}

}  // namespace

GradientSet backward(const Matrix& y, const Matrix& observed, const MixtureModel& model, const ForwardPass& fp,
                     AttentionGrad mode, int threads) {
  check_artifacts(y, observed, model, fp);
  const HyperParams& h = model.hyper;
  const Eigen::Index batch = y.rows();
  if (batch == 0) throw InvalidState("backward: empty batch");

  // dL/dE for the batch mean of sum_k w_k E_k.
  Matrix energy_grad(batch, h.clusters);
  const double scale = 1.0 / static_cast<double>(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (int k = 0; k < h.clusters; ++k) {
      const double w = fp.weights(b, k);
      energy_grad(b, k) = mode == AttentionGrad::full
                              ? scale * w * (1.0 + fp.sample_loss[b] - fp.total(b, k))
                              : scale * w;
    }
  }

  GradientSet grads;
  grads.d_dictionaries.resize(static_cast<std::size_t>(h.clusters));
  parallel_for(h.clusters, threads, [&](int k) {
    const auto ks = static_cast<std::size_t>(k);
    grads.d_dictionaries[ks] =
        cluster_backward(y, observed, model.dictionaries[ks], fp.encodings[ks], energy_grad.col(k), h);
  });

  grads.d_log_prior = Vector::Zero(h.clusters);
  if (h.prior_mode == PriorMode::learnable) {
    // bias_k = -theta_k + logsumexp(theta)
    const Vector prior = model.log_prior.array().exp();
    const Vector per_cluster = energy_grad.colwise().sum().transpose();
    grads.d_log_prior = -per_cluster + prior * per_cluster.sum();
  }
  return grads;
}

GradientSet backward_stopgrad_attention(const Matrix& y, const Matrix& observed, const MixtureModel& model,
                                        const ForwardPass& fp, int threads) {
  return backward(y, observed, model, fp, AttentionGrad::stop, threads);
}

AdamState make_adam_state(const MixtureModel& model, double lr) {
  require(lr >= 0.0, "Adam learning rate must be nonnegative");
  AdamState state;
  state.lr = lr;
  for (const Matrix& a : model.dictionaries) {
    state.first_dict.push_back(Matrix::Zero(a.rows(), a.cols()));
    state.second_dict.push_back(Matrix::Zero(a.rows(), a.cols()));
  }
  state.first_prior = Vector::Zero(model.log_prior.size());
  state.second_prior = Vector::Zero(model.log_prior.size());
  return state;
}

void normalize_columns(std::vector<Matrix>& dictionaries) {
  for (Matrix& a : dictionaries) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double norm = a.col(j).norm();
      if (norm > 0.0) a.col(j) /= norm;
    }
  }
}

void adam_step(MixtureModel& model, const GradientSet& grads, AdamState& state, bool unit_columns) {
  const std::size_t clusters = model.dictionaries.size();
  if (grads.d_dictionaries.size() != clusters || state.first_dict.size() != clusters ||
      grads.d_log_prior.size() != model.log_prior.size()) {
    throw std::invalid_argument("adam_step: gradient/state shapes do not match the model");
  }
  for (std::size_t k = 0; k < clusters; ++k) {
    if (grads.d_dictionaries[k].rows() != model.dictionaries[k].rows() ||
        grads.d_dictionaries[k].cols() != model.dictionaries[k].cols()) {
      throw std::invalid_argument("adam_step: gradient shape does not match dictionary " + std::to_string(k));
    }
    if (!grads.d_dictionaries[k].allFinite()) {
      throw NumericDivergence("adam_step: non-finite gradient for dictionary " + std::to_string(k), 0);
    }
  }
  if (!grads.d_log_prior.allFinite()) throw NumericDivergence("adam_step: non-finite prior gradient", 0);

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * grad;
    v = state.beta2 * v + (1.0 - state.beta2) * grad.cwiseAbs2();
    param.array() -= state.lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + state.epsilon);
  };
  for (std::size_t k = 0; k < clusters; ++k) {
    update(model.dictionaries[k], grads.d_dictionaries[k], state.first_dict[k], state.second_dict[k]);
  }
  if (model.hyper.prior_mode == PriorMode::learnable) {
    update(model.log_prior, grads.d_log_prior, state.first_prior, state.second_prior);
    model.log_prior.array() -= logsumexp(model.log_prior);
  }
  if (unit_columns) normalize_columns(model.dictionaries);
}

}  // namespace mixmate
