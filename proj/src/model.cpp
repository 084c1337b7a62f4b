#include "mixmate/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace mixmate {

Sample Dataset::sample(std::size_t i) const {
  require(i < size(), "Dataset::sample: index out of range");
  Sample s;
  s.y = samples.row(static_cast<Eigen::Index>(i)).transpose();
  if (has_labels()) s.true_z = labels[i];
  if (has_masks()) {
    std::vector<bool> mask(static_cast<std::size_t>(dim()));
    for (int j = 0; j < dim(); ++j) mask[static_cast<std::size_t>(j)] = masks(static_cast<Eigen::Index>(i), j) != 0;
    s.mask = std::move(mask);
  }
  return s;
}

MixtureModel make_model(const HyperParams& hyper) {
  MixtureModel model;
  model.hyper = hyper;
  model.dictionaries.assign(static_cast<std::size_t>(std::max(hyper.clusters, 0)),
                            Matrix::Zero(hyper.dim, hyper.atoms));
  model.log_prior = Vector::Constant(std::max(hyper.clusters, 0), -std::log(static_cast<double>(hyper.clusters)));
  return model;
}

std::vector<std::string> validate(const MixtureModel& model) {
  std::vector<std::string> issues;
  const HyperParams& h = model.hyper;
  if (h.clusters < 1) issues.emplace_back("cluster count must be >= 1");
  if (h.dim < 1) issues.emplace_back("data dimension must be >= 1");
  if (h.atoms < 1) issues.emplace_back("atom count must be >= 1");
  if (!(h.lambda >= 0.0) || !std::isfinite(h.lambda)) issues.emplace_back("lambda must be finite and >= 0");
  if (!(h.eta > 0.0) || !std::isfinite(h.eta)) issues.emplace_back("eta must be finite and > 0");
  if (h.iterations < 1) issues.emplace_back("iteration count must be >= 1");

  if (model.dictionaries.size() != static_cast<std::size_t>(std::max(h.clusters, 0))) {
    issues.emplace_back("dictionary count does not match cluster count");
  }
  for (std::size_t k = 0; k < model.dictionaries.size(); ++k) {
    const Matrix& a = model.dictionaries[k];
    if (a.rows() != h.dim || a.cols() != h.atoms) {
      std::ostringstream msg;
      msg << "shape mismatch: dictionary " << k << " is " << a.rows() << "x" << a.cols() << ", expected "
          << h.dim << "x" << h.atoms;
      issues.push_back(msg.str());
    } else if (!a.allFinite()) {
      issues.push_back("dictionary " + std::to_string(k) + " has non-finite entries");
    }
  }

  if (model.log_prior.size() != h.clusters) {
    issues.emplace_back("log prior length does not match cluster count");
  } else if (!model.log_prior.allFinite()) {
    issues.emplace_back("log prior has non-finite entries");
  } else {
    const double mass = model.log_prior.array().exp().sum();
    if (std::abs(mass - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "prior not normalized (sums to " << mass << ")";
      issues.push_back(msg.str());
    }
  }
  return issues;
}

void require_valid(const MixtureModel& model) {
  const auto issues = validate(model);
  if (issues.empty()) return;
  std::string message = "invalid model:";
  for (const auto& issue : issues) message += " " + issue + ";";
  throw std::invalid_argument(message);
}

std::size_t param_count(const MixtureModel& model) {
  const auto& h = model.hyper;
  std::size_t count = static_cast<std::size_t>(h.clusters) * static_cast<std::size_t>(h.dim) *
                      static_cast<std::size_t>(h.atoms);
  if (h.prior_mode == PriorMode::learnable) count += static_cast<std::size_t>(h.clusters);
  return count;
}

MixtureModel set_uniform_prior(MixtureModel model) {
  const int k = model.hyper.clusters;
  model.log_prior = Vector::Constant(k, -std::log(static_cast<double>(k)));
  return model;
}

Dataset sample_dataset(const MixtureModel& model, std::size_t n, std::uint64_t seed) {
  require_valid(model);
  require(n >= 1, "sample_dataset: n must be >= 1");
  const HyperParams& h = model.hyper;
  require(h.lambda > 0.0, "sample_dataset: improper Laplace prior (lambda = 0)");

  std::mt19937_64 rng(seed);
  std::vector<double> prior(static_cast<std::size_t>(h.clusters));
  for (int k = 0; k < h.clusters; ++k) prior[static_cast<std::size_t>(k)] = std::exp(model.log_prior[k]);
  std::discrete_distribution<int> pick_cluster(prior.begin(), prior.end());
  std::exponential_distribution<double> magnitude(h.lambda);
  std::bernoulli_distribution negative(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset data;
  data.samples.resize(static_cast<Eigen::Index>(n), h.dim);
  data.labels.resize(n);
  Vector code(h.atoms);
  for (std::size_t i = 0; i < n; ++i) {
    const int z = pick_cluster(rng);
    for (int d = 0; d < h.atoms; ++d) {
      const double m = magnitude(rng);
      code[d] = negative(rng) ? -m : m;
    }
    Vector y = model.dictionaries[static_cast<std::size_t>(z)] * code;
    for (int j = 0; j < h.dim; ++j) y[j] += noise(rng);
    data.samples.row(static_cast<Eigen::Index>(i)) = y.transpose();
    data.labels[i] = z;
  }
  return data;
}

const char* to_string(Solver solver) { return solver == Solver::ista ? "ista" : "fista"; }

const char* to_string(StepRule rule) {
  return rule == StepRule::half_quadratic ? "half_quadratic" : "full_quadratic";
}

const char* to_string(PriorMode mode) { return mode == PriorMode::fixed ? "fixed" : "learnable"; }

Solver parse_solver(const std::string& name) {
  if (name == "ista") return Solver::ista;
  if (name == "fista") return Solver::fista;
  throw std::invalid_argument("unknown solver '" + name + "' (expected ista|fista)");
}

StepRule parse_step_rule(const std::string& name) {
  if (name == "half_quadratic") return StepRule::half_quadratic;
  if (name == "full_quadratic") return StepRule::full_quadratic;
  throw std::invalid_argument("unknown step rule '" + name + "' (expected half_quadratic|full_quadratic)");
}

PriorMode parse_prior_mode(const std::string& name) {
  if (name == "fixed") return PriorMode::fixed;
  if (name == "learnable") return PriorMode::learnable;
  throw std::invalid_argument("unknown prior mode '" + name + "' (expected fixed|learnable)");
}

}  // namespace mixmate
