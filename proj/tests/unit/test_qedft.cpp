#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <doctest.h>

#include "oracles.hpp"
#include "pfv/qedft.hpp"
#include "pfv/solver.hpp"

using namespace pfv;
using namespace pfv::testing;

namespace {

EigenSolveConfig cfg() {
  EigenSolveConfig c;
  c.dense_cap = 30000;
  return c;
}

DensityProfile gaussian(int points, double half_width) {
  DensityProfile rho;
  rho.grid = {{-half_width}, {half_width}, {points}};
  for (double x : grid_points(rho.grid)) rho.values.push_back(std::exp(-x * x) / std::sqrt(std::numbers::pi));
  return rho;
}

struct KsRun {
  SystemSpec full;
  ComplexVector psi;
  AuxiliarySystem aux;
  SystemSpec aux_spec;
  ComplexVector phi;
};

KsRun round_trip(const SystemSpec& full, double shift = 0.0) {
  KsRun r;
  r.full = full;
  r.psi = ground_state(full, cfg()).coefficients;
  const DensityProfile rho = electron_density(full, r.psi);
  r.aux = invert_potential_single_electron(rho);
  for (double& v : r.aux.potential) v += shift;
  const EnergyBreakdown b = energy_breakdown(full, r.psi);
  std::vector<double> p;
  for (const auto& m : b.modes) p.push_back(m.p);
  r.aux.forces = aux_mode_forces(p, full.modes);
  r.aux_spec = auxiliary_spec(full, r.aux);
  r.phi = ground_state(r.aux_spec, cfg()).coefficients;
  return r;
}

double max_interior_error(const AuxiliarySystem& aux, double limit) {
  const auto xs = grid_points(aux.grid);
  const std::size_t mid = xs.size() / 2;
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i]) <= limit)
      worst = std::max(worst, std::abs(aux.potential[i] - aux.potential[mid] - 0.5 * xs[i] * xs[i]));
  return worst;
}

}  // namespace

TEST_CASE("Gaussian density inverts to the harmonic potential") {
  const DensityProfile rho = gaussian(401, 8.0);
  const AuxiliarySystem aux = invert_potential_single_electron(rho);
  CHECK(aux.gauge == "min_zero");
  CHECK(*std::min_element(aux.potential.begin(), aux.potential.end()) == 0.0);

  // Discrete formula evaluated directly.
  const auto xs = grid_points(rho.grid);
  const double h = xs[1] - xs[0];
  std::vector<double> direct(xs.size(), 0.0);
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double r0 = std::sqrt(rho.values[i]);
    direct[i] = (std::sqrt(rho.values[i - 1]) + std::sqrt(rho.values[i + 1]) - 2.0 * r0) / (2.0 * h * h * r0);
  }
  const std::size_t mid = xs.size() / 2;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i)
    if (aux.retained[i]) CHECK(std::abs((aux.potential[i] - aux.potential[mid]) - (direct[i] - direct[mid])) < 1e-9);

  // Masked tails, and O(h^2) agreement with x^2/2 on the interior.
  CHECK_FALSE(aux.retained.front());
  CHECK(aux.retained[mid]);
  const double coarse = max_interior_error(aux, 3.0);
  const double fine = max_interior_error(invert_potential_single_electron(gaussian(801, 8.0)), 3.0);
  CHECK(coarse < 5e-3);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("inversion errors") {
  DensityProfile rho = gaussian(101, 6.0);
  rho.values[10] = -1e-3;
  CHECK_THROWS_AS(invert_potential_single_electron(rho), ConfigError);
  CHECK_THROWS_AS(invert_potential_single_electron(gaussian(101, 40.0)), ConfigError);
}

TEST_CASE("auxiliary mode forces") {
  const std::vector<ModeSpec> modes{ModeSpec{1.0, {0.0}, 0.0, 40}};
  CHECK(aux_mode_forces({-0.3}, modes)[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(aux_mode_forces({0.0}, modes)[0] == 0.0);
  const std::vector<ModeSpec> fast{ModeSpec{2.0, {0.0}, 0.0, 40}};
  CHECK(aux_mode_forces({0.1}, fast)[0] == doctest::Approx(-0.8).epsilon(1e-15));

  // Uncoupled driven mode reproduces the target displacement.
  const SystemSpec s = coupled_oscillator(41, 5.0, 0.0, 40, 0.3);
  const ComplexVector psi = ground_state(s, cfg()).coefficients;
  CHECK(std::abs(energy_breakdown(s, psi).modes[0].p + 0.3) < 1e-10);
}

TEST_CASE("round trip through the coupled model") {
  const KsRun r = round_trip(coupled_oscillator(201, 10.0, 0.1, 20));
  const DensityProfile rho = electron_density(r.full, r.psi);
  CHECK(rho.integral() == doctest::Approx(1.0).epsilon(1e-10));
  const DensityProfile rho_s = electron_density(r.aux_spec, r.phi);
  std::vector<bool> interior(rho.values.size());
  for (std::size_t i = 0; i < interior.size(); ++i) interior[i] = rho.values[i] > 1e-12;
  CHECK(density_distance(rho, rho_s, interior) <= 1e-6);

  CHECK(r.aux_spec.modes[0].lambda[0] == 0.0);
  CHECK(std::holds_alternative<interaction::None>(r.aux_spec.interaction));

  const KsIdentityReport k = ks_virial_identities(r.full, r.psi, r.aux_spec, r.phi);
  CHECK(k.electronic.relative <= 1e-5);
  CHECK(k.mode.relative <= 1e-5);
  CHECK(std::abs(k.recovered_coupling - k.direct_coupling) <= 1e-6 * k.recovery.scale);
  CHECK(k.all_pass());
}

TEST_CASE("gauge constant does not change densities or identities") {
  const SystemSpec s = coupled_oscillator(161, 8.0, 0.1, 15);
  const KsRun a = round_trip(s);
  const KsRun b = round_trip(s, 7.0);
  const DensityProfile ra = electron_density(a.aux_spec, a.phi), rb = electron_density(b.aux_spec, b.phi);
  CHECK(density_distance(ra, rb) < 1e-10);
  const KsIdentityReport ka = ks_virial_identities(a.full, a.psi, a.aux_spec, a.phi);
  const KsIdentityReport kb = ks_virial_identities(b.full, b.psi, b.aux_spec, b.phi);
  CHECK(std::abs(ka.electronic.residual - kb.electronic.residual) < 1e-10);
  CHECK(std::abs(ka.mode.residual - kb.mode.residual) < 1e-10);
}

TEST_CASE("identical full and auxiliary systems") {
  const SystemSpec s = coupled_oscillator(101, 8.0, 0.0, 10);
  const ComplexVector psi = ground_state(s, cfg()).coefficients;
  const KsIdentityReport k = ks_virial_identities(s, psi, s, psi);
  CHECK(k.density_error == 0.0);
  CHECK(std::abs(k.electronic.residual) < 1e-12);
  CHECK(std::abs(k.mode.residual) < 1e-12);
}

TEST_CASE("identities refuse mismatched densities") {
  const SystemSpec s = coupled_oscillator(101, 8.0, 0.1, 10);
  const ComplexVector psi = ground_state(s, cfg()).coefficients;
  SystemSpec other = s;
  other.potential = potential::Harmonic{1.5};
  other.modes[0].lambda = {0.0};
  const ComplexVector phi = ground_state(other, cfg()).coefficients;
  CHECK_THROWS_AS(ks_virial_identities(s, psi, other, phi), GateFailed);
}

TEST_CASE("density CSV round trip and grid validation") {
  const DensityProfile rho = gaussian(51, 5.0);
  const auto dir = std::filesystem::temp_directory_path() / "pfv_qedft_test";
  std::filesystem::create_directories(dir);
  write_density_csv(dir / "rho.csv", rho);
  const DensityProfile back = read_density_csv(dir / "rho.csv", rho.grid);
  CHECK(density_distance(rho, back) == 0.0);

  GridSpec shifted = rho.grid;
  shifted.lower[0] += 0.3;
  CHECK_THROWS_AS(read_density_csv(dir / "rho.csv", shifted), ConfigError);
  GridSpec denser = rho.grid;
  denser.points[0] = 61;
  CHECK_THROWS_AS(read_density_csv(dir / "rho.csv", denser), ConfigError);
  std::ofstream(dir / "bad.csv") << "0,abc\n";
  CHECK_THROWS_AS(read_density_csv(dir / "bad.csv", rho.grid), ConfigError);
  CHECK_THROWS_AS(read_density_csv(dir / "missing.csv", rho.grid), ConfigError);
  std::filesystem::remove_all(dir);

  const auto j = to_json(rho);
  CHECK(j.contains("grid"));
  CHECK(j["density"].size() == 51u);
  CHECK(j["integral"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
}
