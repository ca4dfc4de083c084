#include "run_config.hpp"

#include <algorithm>

#include "pfv/spec_json.hpp"

namespace pfv::cli {

namespace {

using nlohmann::json;

void only(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) throw ConfigError(where + "." + key + " must be a number");
  } else {
    if (!it->is_number_integer() || (std::is_unsigned_v<T> && it->get<long long>() < 0))
      throw ConfigError(where + "." + key + " must be a non-negative integer");
  }
  out = it->get<T>();
}

void read_solver(const json& j, EigenSolveConfig& c, const std::string& where) {
  only(j, {"count", "max_iterations", "krylov_dimension", "tolerance", "dense_cap", "seed"}, where);
  read(j, "count", c.count, where);
  read(j, "max_iterations", c.max_iterations, where);
  read(j, "krylov_dimension", c.krylov_dimension, where);
  read(j, "tolerance", c.tolerance, where);
  read(j, "dense_cap", c.dense_cap, where);
  read(j, "seed", c.seed, where);
  c.validate();
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  RunConfig rc;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("electrons")) {
    rc.system = system_spec_from_json(j);
    return rc;
  }
  only(j, {"system", "solver", "scf", "freespace", "tolerances"}, "config");
  if (j.contains("system")) rc.system = system_spec_from_json(j["system"]);
  if (j.contains("freespace")) rc.freespace = freespace_spec_from_json(j["freespace"]);
  if (j.contains("solver")) read_solver(j["solver"], rc.solver, "solver");
  if (j.contains("scf")) {
    const json& s = j["scf"];
    only(s, {"mixing", "tolerance", "max_cycles"}, "scf");
    read(s, "mixing", rc.scf.mixing, "scf");
    read(s, "tolerance", rc.scf.tolerance, "scf");
    read(s, "max_cycles", rc.scf.max_cycles, "scf");
  }
  rc.scf.eigen = rc.solver;
  rc.scf.validate();
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!it->is_number()) throw ConfigError("tolerance '" + it.key() + "' must be a number");
      rc.tolerances.set(it.key(), it->get<double>());
    }
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_json_file(path));
}

}  // namespace pfv::cli
