#include <cmath>

#include "doctest.h"
#include "mixmate/model.hpp"
#include "synthetic.hpp"

using namespace mixmate;

namespace {
HyperParams shape(int k, int m, int d) {
  HyperParams h;
  h.clusters = k;
  h.dim = m;
  h.atoms = d;
  return h;
}
bool has_message(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}
}  // namespace

TEST_CASE("default hyperparameters") {
  const HyperParams h;
  CHECK(h.clusters == 10);
  CHECK(h.dim == 784);
  CHECK(h.atoms == 50);
  CHECK(h.lambda == 0.75);
  CHECK(h.eta == 0.04);
  CHECK(h.iterations == 15);
  CHECK(h.solver == Solver::fista);
  CHECK(h.threshold() == doctest::Approx(0.03));
}

TEST_CASE("validate") {
  MixtureModel model = make_model(shape(10, 784, 50));
  CHECK(validate(model).empty());

  MixtureModel skewed = model;
  skewed.log_prior.array() += std::log(0.9);
  CHECK(has_message(validate(skewed), "prior not normalized"));

  MixtureModel bad_shape = model;
  bad_shape.dictionaries[3] = Matrix::Zero(783, 50);
  CHECK(has_message(validate(bad_shape), "shape mismatch"));
  CHECK_THROWS_AS(require_valid(bad_shape), std::invalid_argument);

  MixtureModel nonfinite = model;
  nonfinite.dictionaries[0](0, 0) = std::nan("");
  CHECK_FALSE(validate(nonfinite).empty());

  HyperParams h = shape(2, 3, 4);
  h.eta = 0.0;
  CHECK_FALSE(validate(make_model(h)).empty());
}

TEST_CASE("param_count") {
  CHECK(param_count(make_model(shape(10, 784, 50))) == 392000);
  CHECK(param_count(make_model(shape(10, 256, 30))) == 76800);
  CHECK(param_count(make_model(shape(1, 1, 1))) == 1);
  HyperParams h = shape(10, 784, 50);
  h.prior_mode = PriorMode::learnable;
  CHECK(param_count(make_model(h)) == 392010);
}

TEST_CASE("set_uniform_prior") {
  const MixtureModel ten = set_uniform_prior(make_model(shape(10, 2, 2)));
  for (int k = 0; k < 10; ++k) CHECK(ten.log_prior[k] == doctest::Approx(-2.302585092994046));
  CHECK(set_uniform_prior(make_model(shape(1, 2, 2))).log_prior[0] == 0.0);
  const MixtureModel two = set_uniform_prior(make_model(shape(2, 2, 2)));
  CHECK(two.log_prior[0] == doctest::Approx(-std::log(2.0)));
  CHECK(two.log_prior[1] == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("sample_dataset single cluster") {
  HyperParams h = shape(1, 2, 2);
  h.lambda = 1.0;
  MixtureModel model = make_model(h);
  model.dictionaries[0] = Matrix::Identity(2, 2);
  const Dataset data = sample_dataset(model, 3, 42);
  CHECK(data.size() == 3);
  CHECK(data.labels == std::vector<int>{0, 0, 0});
}

TEST_CASE("sample_dataset is reproducible") {
  const MixtureModel model = testing::planted_model(3, 6, 2, 1.0, 2.0, 1);
  const Dataset a = sample_dataset(model, 50, 9);
  const Dataset b = sample_dataset(model, 50, 9);
  CHECK(a.samples == b.samples);
  CHECK(a.labels == b.labels);
  CHECK(sample_dataset(model, 50, 10).samples != a.samples);
}

TEST_CASE("sample_dataset Laplace codes and cluster frequencies") {
  // A huge scalar dictionary makes the unit noise negligible, so y / scale is the code.
  HyperParams h = shape(2, 1, 1);
  h.lambda = 2.0;
  MixtureModel model = make_model(h);
  const double scale = 1e6;
  model.dictionaries[0] = Matrix::Constant(1, 1, scale);
  model.dictionaries[1] = Matrix::Constant(1, 1, scale);
  model.log_prior << std::log(0.3), std::log(0.7);
  const std::size_t n = 100000;
  const Dataset data = sample_dataset(model, n, 2024);
  const Vector x = data.samples.col(0) / scale;
  const double mean_abs = x.cwiseAbs().mean();
  CHECK(mean_abs == doctest::Approx(0.5).epsilon(0.02));
  const double var = x.squaredNorm() / static_cast<double>(n);
  CHECK(var == doctest::Approx(2.0 / (h.lambda * h.lambda)).epsilon(0.05));
  const double ones = static_cast<double>(std::count(data.labels.begin(), data.labels.end(), 1)) / n;
  CHECK(std::fabs(ones - 0.7) < 0.01);
}

TEST_CASE("sample_dataset rejects an improper prior") {
  HyperParams h = shape(1, 2, 2);
  h.lambda = 0.0;
  CHECK_THROWS_WITH_AS(sample_dataset(make_model(h), 3, 0), doctest::Contains("improper Laplace prior"),
                       std::invalid_argument);
}

TEST_CASE("enum names round-trip") {
  CHECK(parse_solver(to_string(Solver::ista)) == Solver::ista);
  CHECK(parse_solver(to_string(Solver::fista)) == Solver::fista);
  CHECK(parse_step_rule(to_string(StepRule::full_quadratic)) == StepRule::full_quadratic);
  CHECK(parse_prior_mode(to_string(PriorMode::learnable)) == PriorMode::learnable);
  CHECK_THROWS(parse_solver("adam"));
}
