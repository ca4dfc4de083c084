#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pfv/model.hpp"
#include "pfv/operators.hpp"

namespace pfv {

struct ModeExpectations {
  double q = 0.0;
  double p = 0.0;
  double q_squared = 0.0;
  double omega2_p_squared = 0.0;  // omega^2 <p^2>
  double dipole = 0.0;  // <lambda . sum_i r_i>
  double dipole_squared = 0.0;
  double mixed = 0.0;  // M_a = i/omega sum_j <(lambda . grad_j) q>
};

struct EnergyBreakdown {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double field = 0.0;
  double coupling = 0.0;
  double self_energy = 0.0;
  double drive = 0.0;
  double total = 0.0;  // <H> evaluated directly

  double r_grad_v = 0.0;
  double interaction_virial = 0.0;
  std::string interaction_kernel;
  std::vector<ModeExpectations> modes;

  double eigenresidual = 0.0;
  bool eigenstate = true;  // eigenresidual within the gate
  double max_imaginary = 0.0;
  bool mean_field = false;

  double term_sum() const {
    return kinetic + potential + interaction + field + coupling + self_energy + drive;
  }
  double term_scale() const;
};

struct ResidualEntry {
  std::string identity;
  double residual = 0.0;
  double scale = 0.0;
  double relative = 0.0;
  double tolerance = 0.0;
  // Lower bounds pass when residual >= -tolerance * scale; identities when
  // relative <= tolerance.
  bool lower_bound = false;
  std::optional<double> oracle;
  std::optional<double> oracle_bound;
  std::optional<double> paper_form_residual;
  std::string note;
  bool pass = false;

  bool oracle_pass() const { return !oracle || std::abs(*oracle) <= *oracle_bound; }
};

inline constexpr double kScaleFloor = 1e-12;

ResidualEntry make_entry(std::string identity, double residual, double scale, double tolerance,
                         bool lower_bound = false);

// Named tolerances; every entry can be overridden from the command line.
class Tolerances {
 public:
  Tolerances();
  double get(const std::string& name) const;
  void set(const std::string& name, double value);
  // Parses NAME=VALUE.
  void set_from_string(const std::string& assignment);
  const std::map<std::string, double>& values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

EnergyBreakdown energy_breakdown(const OperatorBuilder& builder, const ComplexVector& psi,
                                 const Tolerances& tol = {},
                                 const MeanFieldParams* mean_field = nullptr);
EnergyBreakdown energy_breakdown(const SystemSpec& spec, const ComplexVector& psi,
                                 const Tolerances& tol = {},
                                 const MeanFieldParams* mean_field = nullptr);

ResidualEntry electronic_virial_residual(const OperatorBuilder& builder, const ComplexVector& psi,
                                         const EnergyBreakdown& b, const Tolerances& tol = {},
                                         const MeanFieldParams* mean_field = nullptr);
ResidualEntry field_mode_virial_residual(const OperatorBuilder& builder, const ComplexVector& psi,
                                         const EnergyBreakdown& b, const Tolerances& tol = {},
                                         const MeanFieldParams* mean_field = nullptr);
ResidualEntry force_balance_residual(const OperatorBuilder& builder, const ComplexVector& psi,
                                     const EnergyBreakdown& b, int mode, const Tolerances& tol = {},
                                     const MeanFieldParams* mean_field = nullptr);
ResidualEntry mixed_virial_residual(const OperatorBuilder& builder, const ComplexVector& psi,
                                    const EnergyBreakdown& b, const Tolerances& tol = {},
                                    const MeanFieldParams* mean_field = nullptr);
// sum (f/omega^2) <D> against <H_ext> + sum f^2/omega^4.
ResidualEntry ext_force_sum_check(const EnergyBreakdown& b, const SystemSpec& spec,
                                  const Tolerances& tol = {});
ResidualEntry combined_virial_residual(const EnergyBreakdown& b, const SystemSpec& spec,
                                       const Tolerances& tol = {});

// Term positivity, per (mode, particle) square positivity, and the gap of
// the summed estimate.
std::vector<ResidualEntry> positivity_estimate_check(const OperatorBuilder& builder,
                                                     const ComplexVector& psi,
                                                     const EnergyBreakdown& b,
                                                     const Tolerances& tol = {});

struct MassRenormResult {
  double mu_continuum = 0.0;
  double mu_discrete = 0.0;
  double cutoff = 0.0;
  double box_length = 0.0;
  double speed_of_light = 0.0;
  std::size_t mode_count = 0;
  double relative_deviation = 0.0;
};

MassRenormResult mass_renorm(const FreeSpaceModeSetSpec& spec);
// (1/3) sum lambda^2 / omega^2 over an explicit mode list.
double mass_renorm_discrete(const std::vector<ModeSpec>& modes);

// Trace of sum lambda lambda^T / omega^2 divided by the dimension, and
// whether that matrix is a multiple of the identity.
struct IsotropicCoupling {
  double mu = 0.0;
  bool isotropic = false;
};
IsotropicCoupling isotropic_coupling(const SystemSpec& spec);

struct IsotropicInequality {
  double value_minus = 0.0;  // drive term with sign -1
  double value_plus = 0.0;  // drive term with sign +1
  double mu = 0.0;
  bool isotropic = false;
  ResidualEntry entry;
};
IsotropicInequality isotropic_virial_inequality(const SystemSpec& spec, const EnergyBreakdown& b,
                                                double mu, const Tolerances& tol = {});

struct VirialReport {
  EnergyBreakdown breakdown;
  std::vector<ResidualEntry> entries;
  bool gate_pass = true;

  bool all_pass() const;
  const ResidualEntry& find(const std::string& identity) const;
};

VirialReport virial_report(const SystemSpec& spec, const ComplexVector& psi,
                           const Tolerances& tol = {},
                           const MeanFieldParams* mean_field = nullptr);

nlohmann::json to_json(const EnergyBreakdown& b);
nlohmann::json to_json(const ResidualEntry& e);
nlohmann::json to_json(const VirialReport& r);
nlohmann::json to_json(const MassRenormResult& m);
std::string to_csv(const VirialReport& r);

}  // namespace pfv
