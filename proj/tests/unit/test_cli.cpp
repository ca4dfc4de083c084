#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "pfv/spec_json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = PFV_CONFIG_DIR;

struct Run {
  int code = 0;
  std::string err;
};

Run pfv_run(std::vector<std::string> args) {
  args.insert(args.begin(), "pfv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream log, err;
  Run r;
  r.code = pfv::cli::run(static_cast<int>(argv.size()), argv.data(), log, err);
  r.err = err.str() + log.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string config(const std::string& name) { return (kConfigs / (name + ".json")).string(); }

}  // namespace

TEST_CASE("uncoupled virial report passes") {
  TempDir out("pfv_cli_uncoupled");
  const Run r = pfv_run({"virial-report", "--config", config("uncoupled_harmonic"), "--out", out.path.string()});
  CHECK(r.code == 0);
  const json report = read_json(out.path / "virial_report.json")["report"];
  CHECK(report["pass"].get<bool>());
  for (const auto& e : report["identities"]) CHECK_MESSAGE(e["pass"].get<bool>(), e["identity"]);
  CHECK(fs::exists(out.path / "virial_report.csv"));

  const json manifest = read_json(out.path / "manifest.json");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["command"] == "virial-report");
  REQUIRE(manifest["artifacts"].size() == 2u);
  for (const auto& a : manifest["artifacts"]) {
    const std::string body = slurp(out.path / a["path"].get<std::string>());
    CHECK(a["sha256"] == pfv::to_hex(pfv::sha256(body)));
  }
}

TEST_CASE("truncated Fock space fails the field-mode identity") {
  TempDir out("pfv_cli_nmax2");
  const Run r = pfv_run({"virial-report", "--config", config("coupled_nmax2"), "--out", out.path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("FAIL field_mode_virial") != std::string::npos);
  const json report = read_json(out.path / "virial_report.json")["report"];
  CHECK_FALSE(report["pass"].get<bool>());
  bool seen = false;
  for (const auto& e : report["identities"]) {
    if (e["identity"] != "field_mode_virial") continue;
    seen = true;
    CHECK(e["relative"].get<double>() > e["tolerance"].get<double>());
  }
  CHECK(seen);
}

TEST_CASE("mass renormalization command") {
  TempDir out("pfv_cli_mass");
  const Run r = pfv_run({"mass-renorm", "--config", config("mass_renorm"), "--out", out.path.string()});
  CHECK(r.code == 0);
  const json m = read_json(out.path / "mass_renorm.json");
  CHECK(m["mu_continuum"].get<double>() == doctest::Approx(3.0968e-3).epsilon(1e-3));
  CHECK(std::abs(m["relative_deviation"].get<double>()) < 0.05);
}

TEST_CASE("usage errors exit with status one") {
  TempDir out("pfv_cli_usage");
  CHECK(pfv_run({"frobnicate", "--config", config("uncoupled_harmonic")}).code == 1);
  CHECK(pfv_run({"solve"}).code == 1);
  CHECK(pfv_run({"solve", "--config", (kConfigs / "missing.json").string()}).code == 1);
  CHECK(pfv_run({"solve", "--config", config("uncoupled_harmonic"), "--out", out.path.string(),
                 "--tol", "nonsense=1"}).code == 1);
  CHECK(pfv_run({"ks-invert", "--config", config("softcoulomb_pair"), "--out", out.path.string()}).code == 1);
  CHECK(pfv_run({"scf", "--config", config("uncoupled_harmonic"), "--out", out.path.string()}).code == 1);
  CHECK(pfv_run({"--help"}).code == 0);
}

TEST_CASE("reports are byte identical across runs") {
  TempDir a("pfv_cli_det_a"), b("pfv_cli_det_b");
  CHECK(pfv_run({"virial-report", "--config", config("uncoupled_harmonic"), "--out", a.path.string()}).code == 0);
  CHECK(pfv_run({"virial-report", "--config", config("uncoupled_harmonic"), "--out", b.path.string(),
                 "--threads", "2"}).code == 0);
  CHECK(slurp(a.path / "virial_report.json") == slurp(b.path / "virial_report.json"));
  CHECK(slurp(a.path / "virial_report.csv") == slurp(b.path / "virial_report.csv"));
}

TEST_CASE("a saved state feeds the report") {
  TempDir out("pfv_cli_state");
  REQUIRE(pfv_run({"solve", "--config", config("uncoupled_harmonic"), "--out", out.path.string()}).code == 0);
  const json energy = read_json(out.path / "energy.json");
  CHECK(fs::exists(out.path / "state.bin"));
  TempDir rep("pfv_cli_state_report");
  CHECK(pfv_run({"virial-report", "--config", config("uncoupled_harmonic"), "--out", rep.path.string(),
                 "--state", (out.path / "state.bin").string()}).code == 0);

  TempDir other("pfv_cli_state_other");
  CHECK(pfv_run({"virial-report", "--config", config("coupled_fine"), "--out", other.path.string(), "--state",
                 (out.path / "state.bin").string()}).code == 1);
}

TEST_CASE("classical field runs the self-consistent cycle") {
  TempDir out("pfv_cli_scf");
  CHECK(pfv_run({"scf", "--config", config("weak_classical"), "--out", out.path.string()}).code == 0);
  const json scf = read_json(out.path / "scf.json");
  CHECK(scf.contains("force_balance"));
}

TEST_CASE("Kohn-Sham inversion command") {
  TempDir out("pfv_cli_ks");
  CHECK(pfv_run({"ks-invert", "--config", config("ks_target"), "--out", out.path.string()}).code == 0);
  const json ks = read_json(out.path / "ks.json");
  CHECK(fs::exists(out.path / "density.csv"));
  CHECK(ks.dump().find("ks_coupling_recovery") != std::string::npos);
}
