#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "symdiff/perm.hpp"
#include "symdiff/reverse.hpp"
#include "symdiff/shuffles.hpp"

namespace symdiff {

struct TrainConfig;

/// Writes via temp file + rename so readers never see partial output.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// FNV-1a 64 of the canonical (sorted-key) JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Shortest round-trip decimal form, '.' separator; used in all CSV output.
std::string format_double(double x);

// 1-based one-line notation, e.g. [2,3,1].
nlohmann::json to_json(const Permutation& p);
Permutation permutation_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Trajectory& traj, bool include_states);
Trajectory trajectory_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReverseParams& params);
ReverseParams reverse_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace symdiff
