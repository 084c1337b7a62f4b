#include "mixmate/objective.hpp"

#include <cmath>
#include <fstream>

#include "mixmate/parallel.hpp"

namespace mixmate {

namespace {

int argmin_lowest(const Eigen::Ref<const Vector>& values) {
  int best = 0;
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    if (values[k] < values[best]) best = static_cast<int>(k);
  }
  return best;
}

}  // namespace

EnergyVector energies(const Sample& sample, const MixtureModel& model, std::span<const EncodeResult> codes) {
  const HyperParams& h = model.hyper;
  require(static_cast<int>(codes.size()) == h.clusters, "energies: need one code per cluster");
  require(sample.y.size() == h.dim, "energies: sample dimension mismatch");
  if (sample.mask) require(static_cast<int>(sample.mask->size()) == h.dim, "energies: mask length mismatch");

  EnergyVector e;
  e.total.resize(h.clusters);
  e.recon.resize(h.clusters);
  e.reg.resize(h.clusters);
  e.bias = -model.log_prior;
  for (int k = 0; k < h.clusters; ++k) {
    const Vector& code = codes[static_cast<std::size_t>(k)].code;
    require(code.size() == h.atoms, "energies: code length mismatch");
    Vector residual = sample.y - model.dictionaries[static_cast<std::size_t>(k)] * code;
    if (sample.mask) {
      for (int j = 0; j < h.dim; ++j) {
        if (!(*sample.mask)[static_cast<std::size_t>(j)]) residual[j] = 0.0;
      }
    }
    e.recon[k] = l2_sq(residual);
    e.reg[k] = h.lambda * l1_norm(code);
    e.total[k] = e.recon[k] + e.reg[k] + e.bias[k];
  }
  return e;
}

Assignment posterior(const EnergyVector& e) {
  return {softmax_neg(e.total), argmin_lowest(e.total)};
}

double loss(const EnergyVector& e) { return softmax_neg(e.total).dot(e.total); }

double batch_loss(std::span<const EnergyVector> batch) {
  require(!batch.empty(), "batch_loss: empty batch");
  double sum = 0.0;
  for (const auto& e : batch) sum += loss(e);
  return sum / static_cast<double>(batch.size());
}

ForwardPass forward(const Matrix& y, const Matrix& observed, const MixtureModel& model, int threads) {
  const HyperParams& h = model.hyper;
  require(y.cols() == h.dim, "forward: data dimension does not match model");
  const Eigen::Index batch = y.rows();
  const bool masked = observed.size() > 0;

  ForwardPass fp;
  fp.encodings.resize(static_cast<std::size_t>(h.clusters));
  fp.recon.resize(batch, h.clusters);
  fp.reg.resize(batch, h.clusters);
  fp.bias = -model.log_prior;

  parallel_for(h.clusters, threads, [&](int k) {
    const Matrix& a = model.dictionaries[static_cast<std::size_t>(k)];
    BatchEncoding enc = encode_batch(y, observed, a, h);
    Matrix residual = y;
    residual.noalias() -= enc.codes * a.transpose();
    if (masked) residual.array() *= observed.array();
    fp.recon.col(k) = residual.rowwise().squaredNorm();
    fp.reg.col(k) = h.lambda * enc.codes.cwiseAbs().rowwise().sum();
    fp.encodings[static_cast<std::size_t>(k)] = std::move(enc);
  });

  fp.total.resize(batch, h.clusters);
  fp.weights.resize(batch, h.clusters);
  fp.labels.resize(static_cast<std::size_t>(batch));
  fp.sample_loss.resize(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Vector total = fp.recon.row(b).transpose() + fp.reg.row(b).transpose() + fp.bias;
    const Vector w = softmax_neg(total);
    fp.total.row(b) = total.transpose();
    fp.weights.row(b) = w.transpose();
    fp.labels[static_cast<std::size_t>(b)] = argmin_lowest(total);
    fp.sample_loss[b] = w.dot(total);
  }
  fp.mean_loss = batch > 0 ? fp.sample_loss.mean() : 0.0;
  if (!std::isfinite(fp.mean_loss)) throw NumericDivergence("forward pass produced a non-finite loss", 0);
  return fp;
}

void gather_batch(const Dataset& data, std::span<const std::size_t> rows, Matrix& y, Matrix& observed) {
  const auto count = static_cast<Eigen::Index>(rows.size());
  y.resize(count, data.dim());
  for (Eigen::Index b = 0; b < count; ++b) y.row(b) = data.samples.row(static_cast<Eigen::Index>(rows[b]));
  if (!data.has_masks()) {
    observed.resize(0, 0);
    return;
  }
  observed.resize(count, data.dim());
  for (Eigen::Index b = 0; b < count; ++b) {
    observed.row(b) = data.masks.row(static_cast<Eigen::Index>(rows[b])).cast<double>();
  }
}

ClusterReport cluster_dataset(const Dataset& data, const MixtureModel& model, int threads, std::size_t chunk) {
  require_valid(model);
  require(data.dim() == model.hyper.dim, "cluster_dataset: dataset dimension does not match model");
  require(chunk >= 1, "cluster_dataset: chunk must be >= 1");
  const std::size_t n = data.size();
  const int clusters = model.hyper.clusters;

  ClusterReport report;
  report.labels.resize(n);
  report.weights.resize(static_cast<Eigen::Index>(n), clusters);
  report.mse.resize(static_cast<Eigen::Index>(n), clusters);
  report.nonzeros.resize(static_cast<Eigen::Index>(n), clusters);
  report.sample_loss.resize(static_cast<Eigen::Index>(n));

  std::vector<std::size_t> rows;
  Matrix y, observed;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    rows.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) rows[i - begin] = i;
    gather_batch(data, rows, y, observed);
    const ForwardPass fp = forward(y, observed, model, threads);
    for (std::size_t i = begin; i < end; ++i) {
      const auto b = static_cast<Eigen::Index>(i - begin);
      const auto r = static_cast<Eigen::Index>(i);
      report.labels[i] = fp.labels[static_cast<std::size_t>(b)];
      report.weights.row(r) = fp.weights.row(b);
      report.sample_loss[r] = fp.sample_loss[b];
      report.mse.row(r) = fp.recon.row(b) / static_cast<double>(data.dim());
      for (int k = 0; k < clusters; ++k) {
        report.nonzeros(r, k) =
            static_cast<int>((fp.encodings[static_cast<std::size_t>(k)].codes.row(b).array() != 0.0).count());
      }
    }
  }
  report.mean_loss = n > 0 ? report.sample_loss.mean() : 0.0;
  return report;
}

void write_assignments_csv(const ClusterReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const Eigen::Index clusters = report.weights.cols();
  out << "sample_index,hard_label";
  for (Eigen::Index k = 0; k < clusters; ++k) out << ",weight_" << k;
  for (Eigen::Index k = 0; k < clusters; ++k) out << ",mse_" << k;
  for (Eigen::Index k = 0; k < clusters; ++k) out << ",l0_" << k;
  out << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < report.labels.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << i << "," << report.labels[i];
    for (Eigen::Index k = 0; k < clusters; ++k) out << "," << report.weights(r, k);
    for (Eigen::Index k = 0; k < clusters; ++k) out << "," << report.mse(r, k);
    for (Eigen::Index k = 0; k < clusters; ++k) out << "," << report.nonzeros(r, k);
    out << "\n";
  }
}

}  // namespace mixmate
