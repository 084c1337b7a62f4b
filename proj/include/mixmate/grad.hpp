#pragma once

#include <stdexcept>
#include <vector>

#include "mixmate/objective.hpp"

namespace mixmate {

// Whether the loss gradient flows through the attention weights (full) or
// treats them as constants, as an EM responsibility would be (stop).
enum class AttentionGrad { full, stop };

const char* to_string(AttentionGrad mode);
AttentionGrad parse_attention_grad(const std::string& name);

// The forward artifacts handed to backward do not match the model or batch.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct GradientSet {
  std::vector<Matrix> d_dictionaries;  // dL/dA_k
  Vector d_log_prior;                  // dL/d(prior logits); zero when the prior is fixed
};

// Exact gradient of the mean batch loss. Each dictionary receives the decoder
// term from its energy plus the contributions from every encoder iteration
// (the same matrix parameterizes both).
GradientSet backward(const Matrix& y, const Matrix& observed, const MixtureModel& model, const ForwardPass& fp,
                     AttentionGrad mode = AttentionGrad::full, int threads = 1);

GradientSet backward_stopgrad_attention(const Matrix& y, const Matrix& observed, const MixtureModel& model,
                                        const ForwardPass& fp, int threads = 1);

struct AdamState {
  std::vector<Matrix> first_dict;
  std::vector<Matrix> second_dict;
  Vector first_prior;
  Vector second_prior;
  long step_count = 0;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const MixtureModel& model, double lr = 0.001);

// Bias-corrected Adam update of every dictionary (and the prior logits when
// learnable). Throws NumericDivergence without touching the model if any
// gradient entry is non-finite. unit_columns rescales every dictionary column
// to unit norm after the step.
void adam_step(MixtureModel& model, const GradientSet& grads, AdamState& state, bool unit_columns = false);

// Scales each nonzero column of every dictionary to unit l2 norm.
void normalize_columns(std::vector<Matrix>& dictionaries);

}  // namespace mixmate
