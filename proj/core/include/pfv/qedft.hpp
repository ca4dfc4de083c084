#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pfv/model.hpp"
#include "pfv/operators.hpp"
#include "pfv/virial.hpp"

namespace pfv {

// One-particle density on the grid, normalized to the particle count.
struct DensityProfile {
  GridSpec grid;
  std::vector<double> values;

  double integral() const;
};

DensityProfile electron_density(const SystemSpec& spec, const ComplexVector& psi);

// L2 norm of the difference over points where `mask` is true (all points if
// mask is empty).
double density_distance(const DensityProfile& a, const DensityProfile& b,
                        const std::vector<bool>& mask = {});

struct AuxiliarySystem {
  GridSpec grid;
  std::vector<double> potential;  // v_s, gauge min = 0
  std::vector<bool> retained;  // points above the density floor
  std::vector<double> forces;  // f_s per mode
  std::string gauge = "min_zero";
};

// v_s = lap sqrt(rho) / (2 sqrt(rho)), shifted so min v_s = 0. Points below
// the floor take the value of the nearest retained point.
AuxiliarySystem invert_potential_single_electron(const DensityProfile& rho,
                                                 double floor = 1e-12);

// f_s = -omega^3 p, so an uncoupled driven mode has <p> = p.
std::vector<double> aux_mode_forces(const std::vector<double>& displacement,
                                    const std::vector<ModeSpec>& modes);

// Same electrons and grid, tabulated v_s with a central-difference
// gradient, no interaction, uncoupled modes driven by f_s.
SystemSpec auxiliary_spec(const SystemSpec& full, const AuxiliarySystem& aux);

// Tabulated potential with a central-difference gradient (one-sided at the
// box edges).
potential::Tabulated tabulate_potential(const GridSpec& grid, std::vector<double> values);

struct KsIdentityReport {
  double density_error = 0.0;
  double displacement_error = 0.0;
  ResidualEntry electronic;  // identity (i)
  ResidualEntry mode;  // identity (ii)
  ResidualEntry recovery;  // recovered <H_c> against the direct value
  double recovered_coupling = 0.0;
  double direct_coupling = 0.0;

  bool all_pass() const { return electronic.pass && mode.pass && recovery.pass; }
};

// Throws GateFailed when densities or mode displacements do not match.
KsIdentityReport ks_virial_identities(const SystemSpec& full, const ComplexVector& full_state,
                                      const SystemSpec& aux, const ComplexVector& aux_state,
                                      const Tolerances& tol = {});

nlohmann::json to_json(const DensityProfile& rho);
nlohmann::json to_json(const AuxiliarySystem& aux);
nlohmann::json to_json(const KsIdentityReport& r);

// Rows of coordinates followed by the density, optional header line; rows in
// grid order (last axis fastest). Coordinates must match the grid.
DensityProfile read_density_csv(const std::filesystem::path& path, const GridSpec& grid);
void write_density_csv(const std::filesystem::path& path, const DensityProfile& rho);

}  // namespace pfv
