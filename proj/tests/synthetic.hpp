#pragma once

#include <random>

#include "mixmate/model.hpp"

namespace mixmate::testing {

// K dictionaries whose columns are slices of one random orthonormal basis,
// lightly perturbed so the subspaces are near-orthogonal rather than exactly so.
inline MixtureModel planted_model(int clusters, int dim, int atoms, double lambda, double scale,
                                  std::uint64_t seed, double perturbation = 0.05) {
  HyperParams h;
  h.clusters = clusters;
  h.dim = dim;
  h.atoms = atoms;
  h.lambda = lambda;
  MixtureModel model = make_model(h);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(dim, clusters * atoms);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                            Eigen::MatrixXd::Identity(dim, clusters * atoms);
  for (int k = 0; k < clusters; ++k) {
    Matrix a = q.middleCols(k * atoms, atoms);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] += perturbation * normal(rng);
    model.dictionaries[static_cast<std::size_t>(k)] = scale * a;
  }
  return model;
}

}  // namespace mixmate::testing
