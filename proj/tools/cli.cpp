#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfv/json_io.hpp"
#include "pfv/parallel.hpp"
#include "pfv/qedft.hpp"
#include "pfv/solver.hpp"
#include "pfv/spec_json.hpp"
#include "pfv/state_io.hpp"
#include "pfv/virial.hpp"
#include "run_config.hpp"

namespace pfv::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string command;
  std::string config;
  std::string out = ".";
  std::vector<std::string> tolerances;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string density;
  std::string state;
};

// Output directory plus the list of files written so far.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(path(name), std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path(name).string());
    f << content;
    if (!f) throw Error("write failed for " + path(name).string());
    names_.push_back(name);
  }

  void record(const std::string& name) { names_.push_back(name); }

  json artifacts() const {
    json files = json::array();
    for (const auto& name : names_) {
      std::ifstream f(path(name), std::ios::binary);
      const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      files.push_back({{"path", name}, {"sha256", to_hex(sha256(bytes))}});
    }
    return files;
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

const SystemSpec& need_system(const RunConfig& rc) {
  if (!rc.system) throw ConfigError("config has no system spec");
  const auto problems = validate_system(*rc.system);
  if (!problems.empty()) {
    std::string msg = "invalid system spec:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return *rc.system;
}

std::string solver_path(std::size_t dimension, const EigenSolveConfig& c) {
  return dimension <= c.dense_cap ? "dense" : "lanczos";
}

QuantumState solve_quantum(const SystemSpec& spec, const RunConfig& rc, std::ostream& log) {
  if (spec.field_treatment == FieldTreatment::classical)
    throw ConfigError("this command needs quantum field treatment; use scf for classical fields");
  const std::size_t dim = hilbert_dimension(spec);
  log << "solving dimension " << dim << " (" << solver_path(dim, rc.solver) << ")\n";
  return ground_state(spec, rc.solver);
}

json solution_json(const QuantumState& s, std::size_t dim, const EigenSolveConfig& c) {
  return {{"energy", s.energy},
          {"eigenresidual", s.eigenresidual},
          {"dimension", dim},
          {"solver", solver_path(dim, c)}};
}

json scf_json(const MeanFieldSolution& sol) {
  return {{"converged", sol.converged},
          {"cycles", sol.cycles},
          {"electronic_energy", sol.electronic.energy},
          {"electronic_eigenresidual", sol.electronic.eigenresidual},
          {"displacement", sol.displacement},
          {"dipole", sol.dipole},
          {"mode_energies", sol.mode_energies},
          {"total_energy", sol.total_energy}};
}

int cmd_solve(const RunConfig& rc, const Tolerances& tol, Outputs& out, std::ostream& log) {
  const SystemSpec& spec = need_system(rc);
  const QuantumState s = solve_quantum(spec, rc, log);
  save_state(s.coefficients, spec, out.path("state.bin"));
  out.record("state.bin");
  const EnergyBreakdown b = energy_breakdown(spec, s.coefficients, tol);
  json j = solution_json(s, hilbert_dimension(spec), rc.solver);
  j["breakdown"] = to_json(b);
  out.write("energy.json", dump_json(j));
  return b.eigenstate ? kExitOk : kExitCheckFailed;
}

int cmd_virial_report(const RunConfig& rc, const Tolerances& tol, const Options& opt,
                      Outputs& out, std::ostream& log) {
  const SystemSpec& spec = need_system(rc);
  VirialReport report;
  json j;
  if (spec.field_treatment == FieldTreatment::classical) {
    const MeanFieldSolution sol = scf_meanfield(spec, rc.scf);
    const MeanFieldParams mf = sol.params();
    report = virial_report(spec, meanfield_product_state(spec, sol), tol, &mf);
    j["scf"] = scf_json(sol);
  } else {
    ComplexVector psi;
    if (!opt.state.empty()) {
      psi = load_state(spec, opt.state);
    } else {
      const QuantumState s = solve_quantum(spec, rc, log);
      j["solution"] = solution_json(s, hilbert_dimension(spec), rc.solver);
      psi = s.coefficients;
    }
    report = virial_report(spec, psi, tol);
  }
  j["report"] = to_json(report);
  out.write("virial_report.json", dump_json(j));
  out.write("virial_report.csv", to_csv(report));
  for (const auto& e : report.entries)
    if (!e.pass) log << "FAIL " << e.identity << " relative " << format_double(e.relative) << '\n';
  if (!report.gate_pass) log << "FAIL eigenstate gate\n";
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

int cmd_scf(const RunConfig& rc, const Tolerances& tol, Outputs& out, std::ostream& log) {
  const SystemSpec& spec = need_system(rc);
  const MeanFieldSolution sol = scf_meanfield(spec, rc.scf);
  log << "scf converged in " << sol.cycles << " cycles\n";
  const MeanFieldParams mf = sol.params();
  const ComplexVector psi = meanfield_product_state(spec, sol);
  const OperatorBuilder builder(spec);
  const EnergyBreakdown b = energy_breakdown(builder, psi, tol, &mf);
  json j = scf_json(sol);
  json balance = json::array();
  bool pass = true;
  for (std::size_t a = 0; a < spec.modes.size(); ++a) {
    const ResidualEntry e = force_balance_residual(builder, psi, b, static_cast<int>(a), tol, &mf);
    pass = pass && e.pass;
    balance.push_back(to_json(e));
  }
  j["force_balance"] = balance;
  j["breakdown"] = to_json(b);
  out.write("scf.json", dump_json(j));
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_ks_invert(const RunConfig& rc, const Tolerances& tol, const Options& opt, Outputs& out,
                  std::ostream& log) {
  const SystemSpec& spec = need_system(rc);
  if (spec.electrons.count != 1) throw ConfigError("ks-invert supports one electron");
  const QuantumState full = solve_quantum(spec, rc, log);
  DensityProfile rho = electron_density(spec, full.coefficients);
  if (!opt.density.empty()) rho = read_density_csv(opt.density, spec.grid);

  AuxiliarySystem aux = invert_potential_single_electron(rho, tol.get("density_floor"));
  const EnergyBreakdown b = energy_breakdown(spec, full.coefficients, tol);
  std::vector<double> p;
  for (const auto& m : b.modes) p.push_back(m.p);
  aux.forces = aux_mode_forces(p, spec.modes);

  const SystemSpec aux_spec = auxiliary_spec(spec, aux);
  const QuantumState phi = ground_state(aux_spec, rc.solver);
  json j;
  j["auxiliary"] = to_json(aux);
  j["auxiliary_solution"] = solution_json(phi, hilbert_dimension(aux_spec), rc.solver);
  int code = kExitOk;
  try {
    const KsIdentityReport r = ks_virial_identities(spec, full.coefficients, aux_spec,
                                                    phi.coefficients, tol);
    j["identities"] = to_json(r);
    if (!r.all_pass()) code = kExitCheckFailed;
  } catch (const GateFailed& e) {
    j["identities"] = {{"gate", e.what()}, {"pass", false}};
    log << "FAIL " << e.what() << '\n';
    code = kExitCheckFailed;
  }
  out.write("ks.json", dump_json(j));
  write_density_csv(out.path("density.csv"), rho);
  out.record("density.csv");
  return code;
}

int cmd_mass_renorm(const RunConfig& rc, Outputs& out) {
  if (!rc.freespace) throw ConfigError("config has no freespace section");
  const MassRenormResult r = mass_renorm(*rc.freespace);
  out.write("mass_renorm.json", dump_json(to_json(r)));
  return kExitOk;
}

int dispatch(const Options& opt, std::ostream& log) {
  RunConfig rc = load_run_config(opt.config);
  Tolerances tol = rc.tolerances;
  for (const auto& t : opt.tolerances) tol.set_from_string(t);
  if (opt.seed) {
    rc.solver.seed = *opt.seed;
    rc.scf.eigen.seed = *opt.seed;
  }
  int threads = 1;
  if (opt.threads) {
    threads = *opt.threads;
  } else if (const char* env = std::getenv("PFV_THREADS")) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("PFV_THREADS must be an integer");
    }
  }
  if (threads < 1) throw ConfigError("thread count must be positive");
  set_thread_count(threads);

  fs::create_directories(opt.out);
  Outputs out(opt.out);
  int code = kExitOk;
  if (opt.command == "solve")
    code = cmd_solve(rc, tol, out, log);
  else if (opt.command == "virial-report")
    code = cmd_virial_report(rc, tol, opt, out, log);
  else if (opt.command == "scf")
    code = cmd_scf(rc, tol, out, log);
  else if (opt.command == "ks-invert")
    code = cmd_ks_invert(rc, tol, opt, out, log);
  else
    code = cmd_mass_renorm(rc, out);

  json m;
  m["command"] = opt.command;
  m["config"] = opt.config;
  m["out"] = opt.out;
  m["tolerance_overrides"] = opt.tolerances;
  m["seed"] = rc.solver.seed;
  m["threads"] = threads;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  m["timestamp"] = ts.str();
  m["exit_code"] = code;
  m["artifacts"] = out.artifacts();
  std::ofstream(out.path("manifest.json"), std::ios::trunc) << dump_json(m);
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  Options opt;
  CLI::App app{"Pauli-Fierz virial laboratory", "pfv"};
  app.add_option("command", opt.command, "solve | virial-report | scf | ks-invert | mass-renorm")
      ->required()
      ->check(CLI::IsMember({"solve", "virial-report", "scf", "ks-invert", "mass-renorm"}));
  app.add_option("--config", opt.config, "Run configuration (JSON)")->required();
  app.add_option("--out", opt.out, "Output directory");
  app.add_option("--tol", opt.tolerances, "Tolerance override NAME=VALUE")->take_all();
  app.add_option("--seed", opt.seed, "Random seed for iterative solvers");
  app.add_option("--threads", opt.threads, "Worker threads (default: PFV_THREADS or 1)");
  app.add_option("--density", opt.density, "ks-invert: density CSV to invert");
  app.add_option("--state", opt.state, "virial-report: evaluate a saved state");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "pfv: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    return dispatch(opt, log);
  } catch (const ConfigError& e) {
    err << "pfv: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapExceeded& e) {
    err << "pfv: " << e.what() << '\n';
    return kExitUsage;
  } catch (const HashMismatch& e) {
    err << "pfv: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NotConverged& e) {
    err << "pfv: " << e.what() << " (best residual " << format_double(e.best_residual()) << ")\n";
    return kExitCheckFailed;
  } catch (const GateFailed& e) {
    err << "pfv: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    err << "pfv: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace pfv::cli
