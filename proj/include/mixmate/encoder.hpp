#pragma once

#include <stdexcept>
#include <vector>

#include "mixmate/model.hpp"

namespace mixmate {

// A non-finite value appeared in the encoder iterates, usually because eta is
// too large for the dictionary's spectral norm.
class NumericDivergence : public std::runtime_error {
 public:
  NumericDivergence(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

struct IterationRecord {
  Vector pre_threshold;  // argument handed to the soft-threshold
  Vector extrapolation;  // point at which the gradient step was taken
  double momentum = 0.0; // extrapolation = x_prev + momentum * (x_prev - x_prev_prev)
};

struct EncodeResult {
  Vector code;
  std::vector<IterationRecord> trace;
  double objective = 0.0;  // ||y - A code||^2 + lambda ||code||_1, observed rows only
};

// Iterates for a batch of samples against one dictionary. Row b of each
// matrix belongs to sample b.
struct BatchTrace {
  std::vector<Matrix> pre_threshold;
  std::vector<Matrix> extrapolation;
  std::vector<double> momentum;
};

struct BatchEncoding {
  Matrix codes;  // B x D
  BatchTrace trace;
};

// ||y - A x||^2 + lambda ||x||_1.
double sparse_objective(const Vector& y, const Matrix& a, const Vector& x, double lambda);

// One shrinkage step from x_prev. With the default rule this is
// f_{eta*lambda}(x_prev + eta A^T (y - A x_prev)).
Vector ista_step(const Vector& x_prev, const Vector& y, const Matrix& a, double eta, double lambda,
                 StepRule rule = StepRule::half_quadratic);

// FISTA momentum coefficients for iterations 1..L (first two are zero).
std::vector<double> momentum_schedule(int iterations);

// L unrolled ISTA/FISTA iterations from x = 0. observed is B x M with 0/1
// entries, or empty when every coordinate is observed; residuals at
// unobserved coordinates are zeroed, which is equivalent to encoding against
// the row subset of the dictionary.
BatchEncoding encode_batch(const Matrix& y, const Matrix& observed, const Matrix& a, const HyperParams& hyper);

EncodeResult encode(const Vector& y, const Matrix& a, const HyperParams& hyper);

// y_observed holds the m observed values in coordinate order.
EncodeResult encode_masked(const Vector& y_observed, const std::vector<bool>& mask, const Matrix& a,
                           const HyperParams& hyper);

// Smallest 1 / (2 sigma_max(A_k)^2) over the dictionaries.
double auto_step_size(const std::vector<Matrix>& dictionaries);

}  // namespace mixmate
