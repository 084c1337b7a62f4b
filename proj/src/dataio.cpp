#include "mixmate/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mixmate/binary_io.hpp"
#include "mixmate/checkpoint.hpp"

namespace mixmate {

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;
constexpr std::uint32_t kHasLabels = 1u;
constexpr std::uint32_t kHasMasks = 2u;

}  // namespace

Dataset load_idx_images(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path.string()));
  const std::uint32_t magic = r.u32_be("magic");
  if (magic != kIdxImages) throw FormatError("not an IDX image file (bad magic)", 0);
  const std::uint32_t n = r.u32_be("image count");
  const std::uint32_t rows = r.u32_be("row count");
  const std::uint32_t cols = r.u32_be("column count");
  if (n == 0) throw FormatError("IDX image file holds no images", 4);
  if (rows == 0 || cols == 0) throw FormatError("IDX image file has an empty image shape", 8);
  const std::size_t m = std::size_t{rows} * cols;
  const std::uint8_t* pixels = r.take(std::size_t{n} * m, "pixels");

  Dataset data;
  data.samples.resize(n, static_cast<Eigen::Index>(m));
  double* out = data.samples.data();
  for (std::size_t i = 0; i < std::size_t{n} * m; ++i) out[i] = pixels[i] / 255.0;
  return data;
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path.string()));
  const std::uint32_t magic = r.u32_be("magic");
  if (magic != kIdxLabels) throw FormatError("not an IDX label file (bad magic)", 0);
  const std::uint32_t n = r.u32_be("label count");
  if (n == 0) throw FormatError("IDX label file holds no labels", 4);
  const std::uint8_t* bytes = r.take(n, "labels");
  return std::vector<int>(bytes, bytes + n);
}

void attach_labels(Dataset& data, std::vector<int> labels) {
  if (labels.size() != data.size()) {
    throw std::invalid_argument("label count " + std::to_string(labels.size()) + " does not match sample count " +
                                std::to_string(data.size()));
  }
  data.labels = std::move(labels);
}

Dataset apply_random_masks(Dataset data, double fraction_images, double fraction_pixels, std::uint64_t seed) {
  require(fraction_images >= 0.0 && fraction_images <= 1.0, "mask image fraction must lie in [0, 1]");
  require(fraction_pixels >= 0.0 && fraction_pixels <= 1.0, "mask pixel fraction must lie in [0, 1]");
  const std::size_t n = data.size();
  const int m = data.dim();
  data.masks.setOnes(static_cast<Eigen::Index>(n), m);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto masked = static_cast<std::size_t>(std::llround(fraction_images * static_cast<double>(n)));
  const auto missing = static_cast<int>(std::llround(fraction_pixels * m));

  std::vector<int> coords(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < masked; ++i) {
    const auto row = static_cast<Eigen::Index>(order[i]);
    std::iota(coords.begin(), coords.end(), 0);
    // Partial Fisher-Yates: the first `missing` entries are a uniform subset.
    for (int j = 0; j < missing; ++j) {
      std::uniform_int_distribution<int> pick(j, m - 1);
      std::swap(coords[static_cast<std::size_t>(j)], coords[static_cast<std::size_t>(pick(rng))]);
      const int c = coords[static_cast<std::size_t>(j)];
      data.masks(row, c) = 0;
      data.samples(row, c) = 0.0;
    }
  }
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  const std::size_t n = data.size();
  const int m = data.dim();
  require(n > 0 && m > 0, "cannot save an empty dataset");
  require(!data.has_labels() || data.labels.size() == n, "label count does not match sample count");
  require(!data.has_masks() || (static_cast<std::size_t>(data.masks.rows()) == n && data.masks.cols() == m),
          "mask shape does not match samples");
  for (int label : data.labels) require(label >= 0 && label <= 255, "labels must fit in one byte");

  const std::uint32_t flags = (data.has_labels() ? kHasLabels : 0u) | (data.has_masks() ? kHasMasks : 0u);
  detail::ByteWriter w;
  w.bytes("MXDS", 4);
  w.u32(kDatasetVersion);
  w.u64(n);
  w.u32(static_cast<std::uint32_t>(m));
  w.u32(flags);
  const double* values = data.samples.data();
  for (std::size_t i = 0; i < n * static_cast<std::size_t>(m); ++i) w.f64(values[i]);
  for (int label : data.labels) w.u8(static_cast<std::uint8_t>(label));
  if (data.has_masks()) {
    const std::uint8_t* bits = data.masks.data();
    const std::size_t total = n * static_cast<std::size_t>(m);
    for (std::size_t start = 0; start < total; start += 8) {
      std::uint8_t byte = 0;
      for (std::size_t b = 0; b < 8 && start + b < total; ++b) {
        if (bits[start + b]) byte |= static_cast<std::uint8_t>(1u << b);
      }
      w.u8(byte);
    }
  }
  detail::write_file(path.string(), w.data());

  const nlohmann::json sidecar = {{"format", "MXDS"},   {"version", kDatasetVersion},    {"n", n},
                                  {"M", m},             {"labels", data.has_labels()}, {"masks", data.has_masks()}};
  std::ofstream js(sidecar_path(path));
  if (!js) throw std::runtime_error("cannot write " + sidecar_path(path).string());
  js << sidecar.dump(2) << "\n";
}

Dataset load_dataset(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path.string()));
  const std::uint8_t* magic = r.take(4, "magic");
  if (std::memcmp(magic, "MXDS", 4) != 0) throw FormatError("bad dataset magic", 0);
  const std::uint32_t version = r.u32("version");
  if (version != kDatasetVersion) throw FormatError("unsupported dataset version " + std::to_string(version), 4);
  const std::uint64_t n = r.u64("n");
  const std::uint32_t m = r.u32("M");
  const std::uint32_t flags = r.u32("flags");
  if (n == 0 || m == 0) throw FormatError("dataset is empty", 8);
  if (flags & ~(kHasLabels | kHasMasks)) throw FormatError("unknown dataset flags", 20);
  const std::size_t total = n * m;
  if (r.remaining() / 8 < total) throw FormatError("truncated file while reading samples", r.position());

  Dataset data;
  data.samples.resize(static_cast<Eigen::Index>(n), m);
  double* values = data.samples.data();
  for (std::size_t i = 0; i < total; ++i) values[i] = r.f64("samples");
  if (flags & kHasLabels) {
    const std::uint8_t* bytes = r.take(n, "labels");
    data.labels.assign(bytes, bytes + n);
  }
  if (flags & kHasMasks) {
    const std::uint8_t* bytes = r.take((total + 7) / 8, "masks");
    data.masks.resize(static_cast<Eigen::Index>(n), m);
    std::uint8_t* bits = data.masks.data();
    for (std::size_t i = 0; i < total; ++i) bits[i] = (bytes[i / 8] >> (i % 8)) & 1u;
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after dataset payload", r.position());

  // The sidecar is informational; when present it has to agree with the header.
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream js(side);
    const auto meta = nlohmann::json::parse(js, nullptr, false);
    if (meta.is_discarded()) throw std::runtime_error("malformed dataset sidecar " + side.string());
    if (meta.value("version", kDatasetVersion) != kDatasetVersion) {
      throw std::runtime_error("dataset sidecar version does not match " + path.string());
    }
    if (meta.value("n", n) != n || meta.value("M", m) != m) {
      throw std::runtime_error("dataset sidecar shape does not match " + path.string());
    }
  }
  return data;
}

Dataset load_text_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::size_t count = 0;
    double v = 0.0;
    while (fields >> v) {
      values.push_back(v);
      ++count;
    }
    if (!fields.eof()) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": not a number");
    if (count == 0) continue;
    if (cols == 0) cols = count;
    if (count != cols) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(cols) + " values, found " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(path.string() + " holds no samples");
  Dataset data;
  data.samples = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  return data;
}

Dataset load_any(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char head[4] = {};
  in.read(head, 4);
  if (in.gcount() == 4) {
    if (std::memcmp(head, "MXDS", 4) == 0) return load_dataset(path);
    const std::uint32_t magic = (std::uint32_t{static_cast<std::uint8_t>(head[0])} << 24) |
                                (std::uint32_t{static_cast<std::uint8_t>(head[1])} << 16) |
                                (std::uint32_t{static_cast<std::uint8_t>(head[2])} << 8) |
                                std::uint32_t{static_cast<std::uint8_t>(head[3])};
    if (magic == kIdxImages) return load_idx_images(path);
  }
  return load_text_matrix(path);
}

}  // namespace mixmate
