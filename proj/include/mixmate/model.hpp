#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixmate/numkernel.hpp"

namespace mixmate {

enum class Solver : std::uint8_t { ista = 0, fista = 1 };

// How the data term enters each encoder iteration.
//   half_quadratic: x + eta * A^T (y - A x), the recurrence as usually printed;
//                   its fixed point minimizes 1/2 ||y - A x||^2 + lambda ||x||_1.
//   full_quadratic: x + 2 eta * A^T (y - A x), the exact gradient step of the
//                   unhalved objective ||y - A x||^2 + lambda ||x||_1.
// Both threshold at eta * lambda.
enum class StepRule : std::uint8_t { half_quadratic = 0, full_quadratic = 1 };

enum class PriorMode : std::uint8_t { fixed = 0, learnable = 1 };

struct HyperParams {
  int clusters = 10;       // K
  int dim = 784;           // M
  int atoms = 50;          // D
  double lambda = 0.75;    // sparsity penalty
  double eta = 0.04;       // encoder step size
  int iterations = 15;     // L unrolled iterations
  Solver solver = Solver::fista;
  StepRule step_rule = StepRule::half_quadratic;
  PriorMode prior_mode = PriorMode::fixed;

  // Multiplier on A^T (y - A x) inside one encoder iteration.
  double data_gain() const { return step_rule == StepRule::full_quadratic ? 2.0 * eta : eta; }
  double threshold() const { return eta * lambda; }
};

struct MixtureModel {
  HyperParams hyper;
  std::vector<Matrix> dictionaries;  // K matrices, each M x D
  Vector log_prior;                  // log pi_k
};

struct Sample {
  Vector y;
  std::optional<int> true_z;
  std::optional<std::vector<bool>> mask;  // true = observed
};

// n samples stored as rows. labels is empty when no ground truth is known;
// masks is empty (0 x 0) when every coordinate is observed.
struct Dataset {
  Matrix samples;
  std::vector<int> labels;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> masks;

  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
  int dim() const { return static_cast<int>(samples.cols()); }
  bool has_labels() const { return !labels.empty(); }
  bool has_masks() const { return masks.size() > 0; }

  Sample sample(std::size_t i) const;
};

// Zero dictionaries and a uniform prior, shaped from hyper.
MixtureModel make_model(const HyperParams& hyper);

// Every violated invariant, one message each. Empty means valid.
std::vector<std::string> validate(const MixtureModel& model);

// Throws std::invalid_argument listing the problems when validate() is non-empty.
void require_valid(const MixtureModel& model);

std::size_t param_count(const MixtureModel& model);

MixtureModel set_uniform_prior(MixtureModel model);

// Draws n samples from the generative model: z ~ Categorical(pi),
// x_i ~ Laplace(scale 1/lambda), y ~ N(A_z x, I).
Dataset sample_dataset(const MixtureModel& model, std::size_t n, std::uint64_t seed);

const char* to_string(Solver solver);
const char* to_string(StepRule rule);
const char* to_string(PriorMode mode);
Solver parse_solver(const std::string& name);
StepRule parse_step_rule(const std::string& name);
PriorMode parse_prior_mode(const std::string& name);

}  // namespace mixmate
