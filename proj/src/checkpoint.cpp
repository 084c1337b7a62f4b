#include "mixmate/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "mixmate/binary_io.hpp"

namespace mixmate {

namespace detail {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace detail

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

nlohmann::json header_json(const MixtureModel& model) {
  const HyperParams& h = model.hyper;
  return {
      {"magic", "MXMT"},
      {"version", kCheckpointVersion},
      {"clusters", h.clusters},
      {"dim", h.dim},
      {"atoms", h.atoms},
      {"lambda", h.lambda},
      {"eta", h.eta},
      {"iterations", h.iterations},
      {"solver", to_string(h.solver)},
      {"prior_mode", to_string(h.prior_mode)},
      {"step_rule", to_string(h.step_rule)},
      {"param_count", param_count(model)},
  };
}

void save_checkpoint(const MixtureModel& model, const std::filesystem::path& path, const nlohmann::json& config) {
  require_valid(model);
  const HyperParams& h = model.hyper;
  detail::ByteWriter w;
  w.bytes("MXMT", 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(h.clusters));
  w.u32(static_cast<std::uint32_t>(h.dim));
  w.u32(static_cast<std::uint32_t>(h.atoms));
  w.f64(h.lambda);
  w.f64(h.eta);
  w.u32(static_cast<std::uint32_t>(h.iterations));
  w.u8(static_cast<std::uint8_t>(h.solver));
  w.u8(static_cast<std::uint8_t>(h.prior_mode));
  w.u8(static_cast<std::uint8_t>(h.step_rule));
  w.u8(0);
  for (const Matrix& a : model.dictionaries) {
    for (Eigen::Index i = 0; i < a.size(); ++i) w.f64(a.data()[i]);
  }
  for (Eigen::Index k = 0; k < model.log_prior.size(); ++k) w.f64(model.log_prior[k]);
  detail::write_file(path.string(), w.data());

  nlohmann::json sidecar = header_json(model);
  sidecar["config"] = config;
  std::ofstream js(sidecar_path(path));
  if (!js) throw std::runtime_error("cannot write " + sidecar_path(path).string());
  js << sidecar.dump(2) << "\n";
}

MixtureModel load_checkpoint(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path.string()));
  const std::uint8_t* magic = r.take(4, "magic");
  if (std::memcmp(magic, "MXMT", 4) != 0) throw FormatError("bad checkpoint magic", 0);
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  HyperParams h;
  h.clusters = static_cast<int>(r.u32("K"));
  h.dim = static_cast<int>(r.u32("M"));
  h.atoms = static_cast<int>(r.u32("D"));
  h.lambda = r.f64("lambda");
  h.eta = r.f64("eta");
  h.iterations = static_cast<int>(r.u32("L"));
  const std::size_t enum_offset = r.position();
  const std::uint8_t solver = r.u8("solver");
  const std::uint8_t prior = r.u8("prior mode");
  const std::uint8_t rule = r.u8("step rule");
  r.u8("reserved");
  if (solver > 1 || prior > 1 || rule > 1) throw FormatError("bad enum field in checkpoint header", enum_offset);
  h.solver = static_cast<Solver>(solver);
  h.prior_mode = static_cast<PriorMode>(prior);
  h.step_rule = static_cast<StepRule>(rule);

  const std::size_t entries = static_cast<std::size_t>(h.clusters) * h.dim * h.atoms;
  r.need((entries + static_cast<std::size_t>(h.clusters)) * 8, "payload");

  MixtureModel model;
  model.hyper = h;
  model.dictionaries.resize(static_cast<std::size_t>(h.clusters));
  for (auto& a : model.dictionaries) {
    a.resize(h.dim, h.atoms);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = r.f64("dictionary");
  }
  model.log_prior.resize(h.clusters);
  for (int k = 0; k < h.clusters; ++k) model.log_prior[k] = r.f64("log prior");
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint payload", r.position());
  require_valid(model);
  return model;
}

}  // namespace mixmate
