#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mixmate/model.hpp"

namespace mixmate {

// IDX images (magic 0x00000803, dims n, h, w, unsigned bytes), flattened
// row-major and divided by 255.
Dataset load_idx_images(const std::filesystem::path& path);

// IDX labels (magic 0x00000801).
std::vector<int> load_idx_labels(const std::filesystem::path& path);

// Attaches labels to a dataset; throws when the counts differ.
void attach_labels(Dataset& data, std::vector<int> labels);

// round(fraction_images * n) images, chosen uniformly, each lose exactly
// round(fraction_pixels * M) coordinates. Unobserved values are zeroed.
Dataset apply_random_masks(Dataset data, double fraction_images, double fraction_pixels, std::uint64_t seed);

// Raw container, little-endian:
//   "MXDS" | u32 version | u64 n | u32 M | u32 flags (bit 0 labels, bit 1 masks)
//   | n*M f64 samples | n u8 labels | ceil(n*M/8) bytes of masks, LSB first
// plus a JSON sidecar at <path>.json with the same header fields.
inline constexpr std::uint32_t kDatasetVersion = 1;

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Whitespace or comma separated numbers, one sample per line.
Dataset load_text_matrix(const std::filesystem::path& path);

// Picks the loader from the file contents: MXDS magic, IDX image magic, else text.
Dataset load_any(const std::filesystem::path& path);

}  // namespace mixmate
