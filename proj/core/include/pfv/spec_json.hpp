#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "pfv/model.hpp"

namespace pfv {

// Strict readers: unknown keys and wrong types throw ConfigError.
SystemSpec system_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SystemSpec& spec);
SystemSpec load_system_spec(const std::filesystem::path& path);

FreeSpaceModeSetSpec freespace_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FreeSpaceModeSetSpec& spec);

nlohmann::json read_json_file(const std::filesystem::path& path);

// Sorted keys, compact, 17 significant digits.
std::string canonical_json(const SystemSpec& spec);
std::array<std::uint8_t, 32> spec_hash(const SystemSpec& spec);

std::array<std::uint8_t, 32> sha256(std::string_view bytes);
std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace pfv
