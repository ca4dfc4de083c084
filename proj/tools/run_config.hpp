#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "pfv/model.hpp"
#include "pfv/solver.hpp"
#include "pfv/virial.hpp"

namespace pfv::cli {

// A config file is either a bare system spec or an object with the keys
// system, solver, scf, freespace and tolerances (all optional).
struct RunConfig {
  std::optional<SystemSpec> system;
  std::optional<FreeSpaceModeSetSpec> freespace;
  EigenSolveConfig solver;
  ScfConfig scf;
  Tolerances tolerances;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace pfv::cli
