#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "mixmate/grad.hpp"
#include "mixmate/init.hpp"
#include "mixmate/metrics.hpp"
#include "mixmate/model.hpp"

namespace mixmate {

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool shuffle = true;
  AttentionGrad attention = AttentionGrad::full;
  int eval_every = 0;  // 0 disables per-epoch metrics
  int threads = 1;
  bool unit_columns = false;  // renormalize atoms after every update
  std::filesystem::path checkpoint;  // written at the end, and on divergence
  nlohmann::json checkpoint_config = nlohmann::json::object();
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // sample-weighted mean of the batch losses seen before each update
  std::optional<ClusteringScores> scores;
};

struct TrainResult {
  MixtureModel model;
  std::vector<EpochRecord> history;
};

// Thrown when a batch produces a non-finite loss or gradient. The model is the
// last one whose update completed; it is also written to cfg.checkpoint.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, MixtureModel last_good, int epoch)
      : std::runtime_error(what), last_good(std::move(last_good)), epoch(epoch) {}
  MixtureModel last_good;
  int epoch;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const Dataset& data, MixtureModel model, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Mean per-sample loss over the whole dataset.
double evaluate_loss(const Dataset& data, const MixtureModel& model, int threads = 1);

// Clusters the dataset and scores it against its labels.
ClusteringScores evaluate_scores(const Dataset& data, const MixtureModel& model, int threads = 1);

struct RestartResult {
  TrainResult best;
  std::vector<double> initial_losses;  // one per restart, before training
  std::vector<double> final_losses;
  int chosen = 0;
};

// Runs init + train `restarts` times with consecutive seeds and keeps the run
// with the lowest final training loss. Labels are never consulted.
RestartResult fit_with_restarts(const Dataset& data, const HyperParams& hyper, const InitOptions& init,
                                const TrainConfig& cfg, int restarts);

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

}  // namespace mixmate
