#include "mixmate/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "mixmate/checkpoint.hpp"
#include "mixmate/objective.hpp"

namespace mixmate {

TrainResult train(const Dataset& data, MixtureModel model, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  require_valid(model);
  require(cfg.batch_size >= 1, "batch_size must be at least 1");
  require(cfg.epochs >= 0, "epochs must be nonnegative");
  require(data.size() > 0, "cannot train on an empty dataset");
  require(data.dim() == model.hyper.dim, "dataset dimension does not match the model");

  TrainResult result;
  AdamState adam = make_adam_state(model, cfg.lr);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix y, observed;

  auto diverged = [&](const std::string& what, int epoch) {
    if (!cfg.checkpoint.empty()) {
      nlohmann::json config = cfg.checkpoint_config;
      config["diverged_at_epoch"] = epoch;
      save_checkpoint(model, cfg.checkpoint, config);
    }
    return TrainingDiverged(what, model, epoch);
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      gather_batch(data, std::span<const std::size_t>(order.data() + start, count), y, observed);
      ForwardPass fp;
      GradientSet grads;
      try {
        fp = forward(y, observed, model, cfg.threads);
        grads = backward(y, observed, model, fp, cfg.attention, cfg.threads);
        MixtureModel next = model;
        adam_step(next, grads, adam, cfg.unit_columns);
        if (!std::ranges::all_of(next.dictionaries, [](const Matrix& a) { return a.allFinite(); })) {
          throw NumericDivergence("update produced non-finite dictionaries", 0);
        }
        model = std::move(next);
      } catch (const NumericDivergence& e) {
        throw diverged("training diverged in epoch " + std::to_string(epoch) + ": " + e.what(), epoch);
      }
      loss_sum += fp.mean_loss * static_cast<double>(count);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.loss = loss_sum / static_cast<double>(order.size());
    if (cfg.eval_every > 0 && data.has_labels() && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)) {
      record.scores = evaluate_scores(data, model, cfg.threads);
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }

  if (!cfg.checkpoint.empty()) save_checkpoint(model, cfg.checkpoint, cfg.checkpoint_config);
  result.model = std::move(model);
  return result;
}

double evaluate_loss(const Dataset& data, const MixtureModel& model, int threads) {
  return cluster_dataset(data, model, threads).mean_loss;
}

ClusteringScores evaluate_scores(const Dataset& data, const MixtureModel& model, int threads) {
  require(data.has_labels(), "scoring needs ground-truth labels");
  const ClusterReport report = cluster_dataset(data, model, threads);
  return score(report.labels, data.labels);
}

RestartResult fit_with_restarts(const Dataset& data, const HyperParams& hyper, const InitOptions& init,
                                const TrainConfig& cfg, int restarts) {
  require(restarts >= 1, "restarts must be at least 1");
  RestartResult out;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    InitOptions init_r = init;
    init_r.seed = init.seed + static_cast<std::uint64_t>(r) * 1000003u;
    TrainConfig cfg_r = cfg;
    cfg_r.seed = cfg.seed + static_cast<std::uint64_t>(r) * 1000003u;
    cfg_r.checkpoint.clear();
    cfg_r.eval_every = 0;
    MixtureModel start = initialize_model(data, hyper, init_r);
    out.initial_losses.push_back(evaluate_loss(data, start, cfg.threads));
    TrainResult run = train(data, std::move(start), cfg_r);
    const double final_loss = evaluate_loss(data, run.model, cfg.threads);
    out.final_losses.push_back(final_loss);
    if (final_loss < best) {
      best = final_loss;
      out.best = std::move(run);
      out.chosen = r;
    }
  }
  if (!cfg.checkpoint.empty()) save_checkpoint(out.best.model, cfg.checkpoint, cfg.checkpoint_config);
  return out;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "epoch,loss,nmi,ari,acc\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << r.loss;
    if (r.scores) {
      out << ',' << r.scores->nmi << ',' << r.scores->ari << ',' << r.scores->acc;
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

}  // namespace mixmate
