#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mixmate/model.hpp"

namespace mixmate {

// Binary model container, all fields little-endian:
//   "MXMT" | u32 version | u32 K | u32 M | u32 D | f64 lambda | f64 eta | u32 L
//   | u8 solver | u8 prior_mode | u8 step_rule | u8 reserved
//   | K*M*D f64 dictionaries (row-major, cluster-major) | K f64 log prior
// A JSON sidecar at <path>.json mirrors the header plus an optional "config"
// object recording how the checkpoint was produced.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const MixtureModel& model, const std::filesystem::path& path,
                     const nlohmann::json& config = nlohmann::json::object());

MixtureModel load_checkpoint(const std::filesystem::path& path);

nlohmann::json header_json(const MixtureModel& model);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace mixmate
