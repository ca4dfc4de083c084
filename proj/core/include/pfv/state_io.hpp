#pragma once

#include <cstdint>
#include <filesystem>

#include "pfv/model.hpp"
#include "pfv/operators.hpp"

namespace pfv {

// Binary layout: "PFVW", u32 version, 32-byte SHA-256 of the canonical spec
// JSON, u64 dimension, then little-endian f64 (re, im) pairs.
inline constexpr std::uint32_t kStateFormatVersion = 1;

void save_state(const ComplexVector& psi, const SystemSpec& spec, const std::filesystem::path& path);

// Throws HashMismatch if the file was written for another spec, CorruptFile
// on any structural problem.
ComplexVector load_state(const SystemSpec& spec, const std::filesystem::path& path);

}  // namespace pfv
