#include "mixmate/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixmate/checkpoint.hpp"
#include "mixmate/dataio.hpp"
#include "mixmate/objective.hpp"
#include "mixmate/trainer.hpp"

namespace mixmate {

namespace {

struct Settings {
  std::string data;
  std::string labels;
  std::string checkpoint;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  double mask_frac_images = 0.0;
  double mask_frac_pixels = 0.0;
  std::string attention_grad = "full";

  HyperParams hyper;
  std::string solver = "fista";
  std::string step_rule = "half_quadratic";
  std::string prior = "fixed";

  std::string init_method = "spectral";
  std::size_t subset_size = 2000;
  int knn = 10;
  std::string column_scaling = "none";
  bool auto_eta = false;

  int epochs = 50;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  bool shuffle = true;
  int eval_every = 0;
  bool unit_columns = false;
  int restarts = 1;
  std::vector<std::uint64_t> trial_seeds;

  std::vector<double> lambdas;
  std::size_t samples = 1000;
};

nlohmann::json resolved(const Settings& s, const std::string& command) {
  return {
      {"command", command},
      {"data", s.data},
      {"labels", s.labels},
      {"checkpoint", s.checkpoint},
      {"out", s.out},
      {"seed", s.seed},
      {"threads", s.threads},
      {"mask-frac-images", s.mask_frac_images},
      {"mask-frac-pixels", s.mask_frac_pixels},
      {"attention-grad", s.attention_grad},
      {"clusters", s.hyper.clusters},
      {"atoms", s.hyper.atoms},
      {"lambda", s.hyper.lambda},
      {"eta", s.hyper.eta},
      {"iterations", s.hyper.iterations},
      {"solver", s.solver},
      {"step-rule", s.step_rule},
      {"prior", s.prior},
      {"init-method", s.init_method},
      {"subset-size", s.subset_size},
      {"knn", s.knn},
      {"column-scaling", s.column_scaling},
      {"auto-eta", s.auto_eta},
      {"epochs", s.epochs},
      {"batch-size", s.batch_size},
      {"lr", s.lr},
      {"shuffle", s.shuffle},
      {"eval-every", s.eval_every},
      {"unit-columns", s.unit_columns},
      {"restarts", s.restarts},
      {"trial-seeds", s.trial_seeds},
      {"lambdas", s.lambdas},
      {"samples", s.samples},
  };
}

void add_options(CLI::App& app, Settings& s) {
  app.add_option("--data", s.data, "dataset: MXDS container, IDX images, or a text matrix");
  app.add_option("--labels", s.labels, "IDX label file paired with --data");
  app.add_option("--checkpoint", s.checkpoint, "input model checkpoint");
  app.add_option("--out", s.out, "output path");
  app.add_option("--seed", s.seed, "random seed");
  app.add_option("--threads", s.threads, "worker threads (1 = bitwise reproducible)")->check(CLI::PositiveNumber);
  app.add_option("--mask-frac-images", s.mask_frac_images, "fraction of samples given a random mask")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--mask-frac-pixels", s.mask_frac_pixels, "fraction of coordinates hidden in a masked sample")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--attention-grad", s.attention_grad, "gradient through the attention weights")
      ->check(CLI::IsMember({"full", "stop"}));

  app.add_option("--clusters", s.hyper.clusters, "K")->check(CLI::PositiveNumber);
  app.add_option("--atoms", s.hyper.atoms, "D, atoms per dictionary")->check(CLI::PositiveNumber);
  app.add_option("--lambda", s.hyper.lambda, "sparsity penalty")->check(CLI::NonNegativeNumber);
  app.add_option("--eta", s.hyper.eta, "encoder step size")->check(CLI::PositiveNumber);
  app.add_option("--iterations", s.hyper.iterations, "L, unrolled encoder iterations")->check(CLI::PositiveNumber);
  app.add_option("--solver", s.solver)->check(CLI::IsMember({"ista", "fista"}));
  app.add_option("--step-rule", s.step_rule)->check(CLI::IsMember({"half_quadratic", "full_quadratic"}));
  app.add_option("--prior", s.prior)->check(CLI::IsMember({"fixed", "learnable"}));

  app.add_option("--init-method", s.init_method)->check(CLI::IsMember({"kmeans", "spectral", "ssc_lite"}));
  app.add_option("--subset-size", s.subset_size, "|S|, points used to build dictionaries");
  app.add_option("--knn", s.knn, "neighbours in the spectral graph")->check(CLI::PositiveNumber);
  app.add_option("--column-scaling", s.column_scaling)->check(CLI::IsMember({"none", "unit"}));
  app.add_option("--auto-eta", s.auto_eta, "replace eta by min_k 1/(2 sigma_max(A_k)^2) after init");

  app.add_option("--epochs", s.epochs)->check(CLI::NonNegativeNumber);
  app.add_option("--batch-size", s.batch_size)->check(CLI::PositiveNumber);
  app.add_option("--lr", s.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  app.add_option("--shuffle", s.shuffle);
  app.add_option("--eval-every", s.eval_every, "epochs between metric evaluations (0 = off)");
  app.add_option("--unit-columns", s.unit_columns, "renormalize atoms after each update");
  app.add_option("--restarts", s.restarts, "independent init+train runs; keeps the lowest final loss")
      ->check(CLI::PositiveNumber);
  app.add_option("--trial-seeds", s.trial_seeds, "one full init+train run per seed")->delimiter(',');

  app.add_option("--lambdas", s.lambdas, "lambda values for sweep-lambda")->delimiter(',');
  app.add_option("--samples", s.samples, "sample count for the sample command");
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void need(const std::string& value, const char* flag, const char* command) {
  if (value.empty()) throw UsageError(std::string(command) + " requires " + flag);
}

HyperParams hyper_from(const Settings& s) {
  HyperParams h = s.hyper;
  h.solver = parse_solver(s.solver);
  h.step_rule = parse_step_rule(s.step_rule);
  h.prior_mode = parse_prior_mode(s.prior);
  return h;
}

InitOptions init_from(const Settings& s) {
  InitOptions o;
  o.method = parse_init_method(s.init_method);
  o.subset_size = s.subset_size;
  o.seed = s.seed;
  o.knn = s.knn;
  o.column_scaling = parse_column_scaling(s.column_scaling);
  o.auto_eta = s.auto_eta;
  o.threads = s.threads;
  return o;
}

TrainConfig train_from(const Settings& s, const std::string& checkpoint, const nlohmann::json& config) {
  TrainConfig c;
  c.epochs = s.epochs;
  c.batch_size = s.batch_size;
  c.lr = s.lr;
  c.seed = s.seed;
  c.shuffle = s.shuffle;
  c.attention = parse_attention_grad(s.attention_grad);
  c.eval_every = s.eval_every;
  c.threads = s.threads;
  c.unit_columns = s.unit_columns;
  c.checkpoint = checkpoint;
  c.checkpoint_config = config;
  return c;
}

Dataset load_data(const Settings& s, const char* command) {
  need(s.data, "--data", command);
  if (!std::filesystem::exists(s.data)) throw UsageError("dataset not found: " + s.data);
  Dataset data = load_any(s.data);
  if (!s.labels.empty()) {
    if (!std::filesystem::exists(s.labels)) throw UsageError("label file not found: " + s.labels);
    attach_labels(data, load_idx_labels(s.labels));
  }
  if (s.mask_frac_images > 0.0 && s.mask_frac_pixels > 0.0) {
    data = apply_random_masks(std::move(data), s.mask_frac_images, s.mask_frac_pixels, s.seed);
  }
  return data;
}

MixtureModel load_model(const Settings& s, const char* command) {
  need(s.checkpoint, "--checkpoint", command);
  if (!std::filesystem::exists(s.checkpoint)) throw UsageError("checkpoint not found: " + s.checkpoint);
  return load_checkpoint(s.checkpoint);
}

void print_scores(std::ostream& out, const char* stage, const ClusteringScores& sc) {
  out << std::fixed << std::setprecision(4) << stage << " nmi=" << sc.nmi << " ari=" << sc.ari
      << " acc=" << sc.acc << "\n";
  out.unsetf(std::ios::floatfield);
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

int cmd_init(const Settings& s, std::ostream& out) {
  need(s.out, "--out", "init");
  const Dataset data = load_data(s, "init");
  const MixtureModel model = initialize_model(data, hyper_from(s), init_from(s));
  save_checkpoint(model, s.out, resolved(s, "init"));
  out << "wrote " << s.out << " (K=" << model.hyper.clusters << " M=" << model.hyper.dim
      << " D=" << model.hyper.atoms << ", " << param_count(model) << " parameters, eta=" << model.hyper.eta << ")\n";
  if (data.has_labels()) print_scores(out, "init", evaluate_scores(data, model, s.threads));
  return kExitOk;
}

TrainResult train_once(const Settings& s, const Dataset& data, const std::string& out_path,
                       const nlohmann::json& config, std::ostream& out) {
  const TrainConfig cfg = train_from(s, out_path, config);
  auto report = [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << " loss=" << std::setprecision(10) << r.loss;
    if (r.scores) {
      out << std::setprecision(4) << " nmi=" << r.scores->nmi << " ari=" << r.scores->ari
          << " acc=" << r.scores->acc;
    }
    out << "\n";
  };
  if (!s.checkpoint.empty()) return train(data, load_model(s, "train"), cfg, report);
  if (s.restarts > 1) {
    RestartResult r = fit_with_restarts(data, hyper_from(s), init_from(s), cfg, s.restarts);
    for (const EpochRecord& rec : r.best.history) report(rec);
    out << "kept restart " << r.chosen << " of " << s.restarts << "\n";
    return std::move(r.best);
  }
  return train(data, initialize_model(data, hyper_from(s), init_from(s)), cfg, report);
}

int cmd_train(const Settings& s, std::ostream& out) {
  need(s.out, "--out", "train");
  const Dataset data = load_data(s, "train");
  if (s.trial_seeds.empty()) {
    const TrainResult r = train_once(s, data, s.out, resolved(s, "train"), out);
    write_history_csv(r.history, s.out + ".history.csv");
    if (data.has_labels()) print_scores(out, "trained", evaluate_scores(data, r.model, s.threads));
    out << "wrote " << s.out << "\n";
    return kExitOk;
  }

  // Repeated trials: every seed re-runs init (unless a checkpoint is given) and training.
  std::ofstream csv(s.out + ".trials.csv");
  if (!csv) throw std::runtime_error("cannot write " + s.out + ".trials.csv");
  csv.precision(17);
  csv << "seed,loss,nmi,ari,acc\n";
  for (std::uint64_t seed : s.trial_seeds) {
    Settings trial = s;
    trial.seed = seed;
    const std::string path = s.out + ".seed" + std::to_string(seed);
    const TrainResult r = train_once(trial, data, path, resolved(trial, "train"), out);
    write_history_csv(r.history, path + ".history.csv");
    csv << seed << ',' << evaluate_loss(data, r.model, s.threads);
    if (data.has_labels()) {
      const ClusteringScores sc = evaluate_scores(data, r.model, s.threads);
      print_scores(out, ("seed " + std::to_string(seed)).c_str(), sc);
      csv << ',' << sc.nmi << ',' << sc.ari << ',' << sc.acc;
    } else {
      csv << ",,,";
    }
    csv << '\n';
  }
  write_json(resolved(s, "train"), s.out + ".trials.csv.config.json");
  return kExitOk;
}

int cmd_eval(const Settings& s, std::ostream& out) {
  const MixtureModel model = load_model(s, "eval");
  const Dataset data = load_data(s, "eval");
  const ClusterReport report = cluster_dataset(data, model, s.threads);
  out << "samples=" << data.size() << " masked=" << (data.has_masks() ? "yes" : "no")
      << " mean_loss=" << std::setprecision(10) << report.mean_loss << "\n";
  if (data.has_labels()) print_scores(out, "eval", score(report.labels, data.labels));
  if (!s.out.empty()) {
    write_assignments_csv(report, s.out);
    write_json(resolved(s, "eval"), s.out + ".config.json");
  }
  return kExitOk;
}

int cmd_sweep(const Settings& s, std::ostream& out) {
  if (s.lambdas.empty()) throw UsageError("sweep-lambda requires a non-empty --lambdas list");
  need(s.out, "--out", "sweep-lambda");
  const Dataset data = load_data(s, "sweep-lambda");
  MixtureModel start =
      s.checkpoint.empty() ? initialize_model(data, hyper_from(s), init_from(s)) : load_model(s, "sweep-lambda");

  std::ofstream csv(s.out);
  if (!csv) throw std::runtime_error("cannot write " + s.out);
  csv.precision(17);
  csv << "lambda,loss,nmi,ari,acc\n";
  for (double lambda : s.lambdas) {
    require(lambda >= 0.0, "lambda values must be nonnegative");
    MixtureModel model = start;
    model.hyper.lambda = lambda;
    const TrainResult r = train(data, std::move(model), train_from(s, "", {}));
    const ClusterReport report = cluster_dataset(data, r.model, s.threads);
    csv << lambda << ',' << report.mean_loss;
    out << "lambda=" << lambda << " loss=" << report.mean_loss;
    if (data.has_labels()) {
      const ClusteringScores sc = score(report.labels, data.labels);
      csv << ',' << sc.nmi << ',' << sc.ari << ',' << sc.acc;
      out << " nmi=" << sc.nmi << " ari=" << sc.ari << " acc=" << sc.acc;
    } else {
      csv << ",,,";
    }
    csv << '\n';
    out << "\n";
  }
  write_json(resolved(s, "sweep-lambda"), s.out + ".config.json");
  return kExitOk;
}

int cmd_sample(const Settings& s, std::ostream& out) {
  need(s.out, "--out", "sample");
  if (s.samples == 0) throw UsageError("sample requires --samples >= 1");
  const MixtureModel model = load_model(s, "sample");
  const Dataset data = sample_dataset(model, s.samples, s.seed);
  save_dataset(data, s.out);
  write_json(resolved(s, "sample"), s.out + ".config.json");
  out << "wrote " << data.size() << " samples to " << s.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixture of sparse unrolled auto-encoders for clustering", "mixmate"};
  Settings s;
  add_options(app, s);
  app.set_config("--config", "", "flat key = value file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  CLI::App* init = app.add_subcommand("init", "build dictionaries from a data subset and write a checkpoint");
  CLI::App* train_cmd = app.add_subcommand("train", "train a checkpoint (or a fresh init) and write the result");
  CLI::App* eval = app.add_subcommand("eval", "cluster a dataset, print metrics, write per-sample assignments");
  CLI::App* sweep = app.add_subcommand("sweep-lambda", "train one model per lambda from a shared init");
  CLI::App* sample = app.add_subcommand("sample", "draw a synthetic dataset from a checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (init->parsed()) return cmd_init(s, out);
    if (train_cmd->parsed()) return cmd_train(s, out);
    if (eval->parsed()) return cmd_eval(s, out);
    if (sweep->parsed()) return cmd_sweep(s, out);
    if (sample->parsed()) return cmd_sample(s, out);
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << "\n";
    if (!s.out.empty()) err << "last good model kept at " << s.out << "\n";
    return kExitNumeric;
  } catch (const NumericDivergence& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace mixmate
