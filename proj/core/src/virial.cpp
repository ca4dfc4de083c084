#include "pfv/virial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pfv/json_io.hpp"
#include "pfv/solver.hpp"

namespace pfv {

namespace {

constexpr Complex kI{0.0, 1.0};

double real_expectation(const SparseOperator& op, const ComplexVector& psi, double& imag) {
  const Complex v = expectation(op, psi);
  imag = std::max(imag, std::abs(v.imag()));
  return v.real();
}

SparseOperator total_of(const OperatorBuilder& builder, const MeanFieldParams* mf) {
  if (builder.spec().field_treatment == FieldTreatment::classical && !mf)
    throw Error("classical field treatment needs mean-field parameters");
  return builder.term(TermId::Total, mf);
}

// Self-energy entering the mixed virial. For a mean-field product state the
// electronic fluctuation of the dipole drops out of that identity.
double mixed_self_energy(const EnergyBreakdown& b) {
  if (!b.mean_field) return b.self_energy;
  double s = 0.0;
  for (const auto& m : b.modes) s += 0.5 * m.dipole * m.dipole;
  return s;
}

double drive_dipole_sum(const EnergyBreakdown& b, const SystemSpec& spec) {
  double s = 0.0;
  for (std::size_t a = 0; a < spec.modes.size(); ++a)
    s += spec.modes[a].drive / (spec.modes[a].omega * spec.modes[a].omega) * b.modes[a].dipole;
  return s;
}

double drive_square_sum(const SystemSpec& spec) {
  double s = 0.0;
  for (const auto& m : spec.modes) s += std::pow(m.drive / (m.omega * m.omega), 2);
  return s;
}

ResidualEntry with_oracle(ResidualEntry e, double oracle, double bound) {
  e.oracle = oracle;
  e.oracle_bound = bound;
  e.pass = e.pass && e.oracle_pass();
  return e;
}

}  // namespace

// ---------------------------------------------------------------- entries

ResidualEntry make_entry(std::string identity, double residual, double scale, double tolerance,
                         bool lower_bound) {
  ResidualEntry e;
  e.identity = std::move(identity);
  e.residual = residual;
  e.scale = scale;
  e.relative = std::abs(residual) / std::max(scale, kScaleFloor);
  e.tolerance = tolerance;
  e.lower_bound = lower_bound;
  e.pass = lower_bound ? residual >= -tolerance * std::max(scale, kScaleFloor)
                       : e.relative <= tolerance;
  return e;
}

Tolerances::Tolerances()
    : values_{{"electronic", 1e-4},    {"mode", 1e-8},         {"force_balance", 1e-8},
              {"mixed", 1e-6},         {"ext_force_sum", 1e-8}, {"combined", 1e-4},
              {"positivity", 1e-10},   {"positivity_term", 1e-12}, {"isotropic", 1e-10},
              {"eigenresidual", 1e-10}, {"imaginary", 1e-10},  {"density", 1e-6},
              {"identity", 1e-5},      {"recovery", 1e-6},     {"displacement", 1e-8},
              {"density_floor", 1e-12}} {}

double Tolerances::get(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown tolerance '" + name + "'");
  return it->second;
}

void Tolerances::set(const std::string& name, double value) {
  if (!values_.contains(name)) throw ConfigError("unknown tolerance '" + name + "'");
  if (!(value >= 0.0) || !std::isfinite(value))
    throw ConfigError("tolerance '" + name + "' must be a non-negative number");
  values_[name] = value;
}

void Tolerances::set_from_string(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("tolerance override must look like NAME=VALUE");
  const std::string name = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError("bad tolerance value '" + text + "'");
  set(name, value);
}

double EnergyBreakdown::term_scale() const {
  return std::abs(kinetic) + std::abs(potential) + std::abs(interaction) + std::abs(field) +
         std::abs(coupling) + std::abs(self_energy) + std::abs(drive);
}

// ---------------------------------------------------------------- breakdown

EnergyBreakdown energy_breakdown(const OperatorBuilder& builder, const ComplexVector& psi,
                                 const Tolerances& tol, const MeanFieldParams* mean_field) {
  if (static_cast<std::size_t>(psi.size()) != builder.dimension())
    throw DimensionMismatch("state does not match the system dimension");
  const SystemSpec& spec = builder.spec();
  const SparseOperator h = total_of(builder, mean_field);
  EnergyBreakdown b;
  double imag = 0.0;
  b.kinetic = real_expectation(builder.term(TermId::Kinetic), psi, imag);
  b.potential = real_expectation(builder.term(TermId::ExternalPotential), psi, imag);
  b.interaction = real_expectation(builder.term(TermId::Interaction), psi, imag);
  b.field = real_expectation(builder.term(TermId::FieldEnergy), psi, imag);
  b.coupling = real_expectation(builder.term(TermId::DipoleCoupling, mean_field), psi, imag);
  b.self_energy = real_expectation(builder.term(TermId::DipoleSelfEnergy), psi, imag);
  b.drive = real_expectation(builder.term(TermId::ExternalDrive), psi, imag);
  b.total = real_expectation(h, psi, imag);
  b.r_grad_v = real_expectation(builder.position_dot_force(), psi, imag);
  b.interaction_virial = real_expectation(builder.interaction_virial(), psi, imag);
  b.interaction_kernel = interaction_kernel_label(spec.interaction);
  b.mean_field = spec.field_treatment == FieldTreatment::classical;

  for (std::size_t a = 0; a < spec.modes.size(); ++a) {
    const int m = static_cast<int>(a);
    const double w = spec.modes[a].omega;
    const LadderMatrices L = mode_ladder_matrices(spec.modes[a]);
    ModeExpectations e;
    e.q = real_expectation(builder.mode_matrix(m, L.q, true), psi, imag);
    e.p = real_expectation(builder.mode_matrix(m, L.p, true), psi, imag);
    e.q_squared = real_expectation(builder.mode_matrix(m, L.q_squared, true), psi, imag);
    e.omega2_p_squared = w * w * real_expectation(builder.mode_matrix(m, L.p_squared, true), psi, imag);
    e.dipole = real_expectation(builder.dipole(m), psi, imag);
    e.dipole_squared = real_expectation(builder.dipole_squared(m), psi, imag);
    // i/omega <G q> is real because G is anti-Hermitian and commutes with q.
    const Complex gq = expectation(builder.coupling_gradient(m, -1, true), psi);
    const Complex mixed = kI / w * gq;
    imag = std::max(imag, std::abs(mixed.imag()));
    e.mixed = mixed.real();
    b.modes.push_back(e);
  }

  b.eigenresidual = eigenstate_residual(h, psi);
  b.eigenstate = b.eigenresidual <= tol.get("eigenresidual");
  b.max_imaginary = imag;
  return b;
}

EnergyBreakdown energy_breakdown(const SystemSpec& spec, const ComplexVector& psi,
                                 const Tolerances& tol, const MeanFieldParams* mean_field) {
  return energy_breakdown(OperatorBuilder(spec), psi, tol, mean_field);
}

// ---------------------------------------------------------------- identities

ResidualEntry electronic_virial_residual(const OperatorBuilder& builder, const ComplexVector& psi,
                                         const EnergyBreakdown& b, const Tolerances& tol,
                                         const MeanFieldParams* mean_field) {
  const double residual = 2.0 * b.kinetic + b.interaction_virial - b.coupling -
                          2.0 * b.self_energy - b.r_grad_v;
  const double scale = 2.0 * std::abs(b.kinetic) + std::abs(b.interaction_virial) +
                       std::abs(b.coupling) + 2.0 * std::abs(b.self_energy) + std::abs(b.r_grad_v);
  ResidualEntry e = make_entry("electronic_virial", residual, scale, tol.get("electronic"));
  e.paper_form_residual =
      2.0 * b.kinetic + b.interaction - b.coupling - 2.0 * b.self_energy - b.r_grad_v;
  e.note = "interaction kernel: " + b.interaction_kernel;

  const SparseOperator a = builder.virial(VirialKind::electronic);
  const Complex c = commutator_expectation(total_of(builder, mean_field), a, psi);
  return with_oracle(std::move(e), c.real(), 10.0 * b.eigenresidual * norm(a.apply(psi)));
}

ResidualEntry field_mode_virial_residual(const OperatorBuilder& builder, const ComplexVector& psi,
                                         const EnergyBreakdown& b, const Tolerances& tol,
                                         const MeanFieldParams* mean_field) {
  double diff = 0.0, scale = 0.0;
  for (const auto& m : b.modes) {
    diff += m.omega2_p_squared - m.q_squared;
    scale += std::abs(m.omega2_p_squared) + std::abs(m.q_squared);
  }
  const double residual = diff + b.coupling + b.drive;
  scale += std::abs(b.coupling) + std::abs(b.drive);
  ResidualEntry e = make_entry("field_mode_virial", residual, scale, tol.get("mode"));

  double printed = b.drive + b.coupling;
  const auto& modes = builder.spec().modes;
  for (std::size_t a = 0; a < modes.size(); ++a) {
    const double w2 = modes[a].omega * modes[a].omega;
    printed -= b.modes[a].omega2_p_squared - w2 * b.modes[a].q_squared;
  }
  e.paper_form_residual = printed;
  if (modes.empty()) return e;

  const SparseOperator a = builder.virial(VirialKind::mode);
  const Complex c = commutator_expectation(total_of(builder, mean_field), a, psi);
  return with_oracle(std::move(e), (kI * c).real(), 10.0 * b.eigenresidual * norm(a.apply(psi)));
}

ResidualEntry force_balance_residual(const OperatorBuilder& builder, const ComplexVector& psi,
                                     const EnergyBreakdown& b, int mode, const Tolerances& tol,
                                     const MeanFieldParams* mean_field) {
  const auto& modes = builder.spec().modes;
  if (mode < 0 || static_cast<std::size_t>(mode) >= modes.size())
    throw Error("unknown mode index " + std::to_string(mode));
  const ModeSpec& ms = modes[mode];
  const ModeExpectations& m = b.modes[mode];
  const double w = ms.omega;
  const double residual = w * w * m.p - w * m.dipole + ms.drive / w;
  // Root-mean-square magnitudes: the first moments vanish by parity in
  // undriven symmetric systems.
  const double scale = w * std::sqrt(std::max(m.omega2_p_squared, 0.0)) +
                       w * std::sqrt(std::max(m.dipole_squared, 0.0)) + std::abs(ms.drive / w);
  ResidualEntry e = make_entry("force_balance[" + std::to_string(mode) + "]", residual, scale,
                               tol.get("force_balance"));

  const LadderMatrices L = mode_ladder_matrices(ms);
  const SparseOperator q = builder.mode_matrix(mode, L.q, true);
  const Complex c = commutator_expectation(total_of(builder, mean_field), q, psi);
  return with_oracle(std::move(e), (kI * c).real(), 10.0 * b.eigenresidual * norm(q.apply(psi)));
}

ResidualEntry mixed_virial_residual(const OperatorBuilder& builder, const ComplexVector& psi,
                                    const EnergyBreakdown& b, const Tolerances& tol,
                                    const MeanFieldParams* mean_field) {
  const SystemSpec& spec = builder.spec();
  double msum = 0.0, mscale = 0.0;
  for (const auto& m : b.modes) {
    msum += m.mixed;
    mscale += std::abs(m.mixed);
  }
  const double hd = mixed_self_energy(b);
  const double drive = drive_dipole_sum(b, spec);
  const double residual = msum + b.coupling + 2.0 * hd - drive;
  const double scale = mscale + std::abs(b.coupling) + 2.0 * std::abs(hd) + std::abs(drive);
  ResidualEntry e = make_entry("mixed_virial", residual, scale, tol.get("mixed"));
  e.paper_form_residual = msum + b.coupling + 2.0 * hd + drive;
  if (b.mean_field) e.note = "self-energy taken as sum <D>^2/2";
  if (spec.modes.empty()) return e;

  const SparseOperator h = total_of(builder, mean_field);
  double oracle = 0.0, bound = 0.0;
  for (std::size_t a = 0; a < spec.modes.size(); ++a) {
    const double w = spec.modes[a].omega;
    const SparseOperator op = builder.virial(VirialKind::mixed, static_cast<int>(a));
    oracle += (commutator_expectation(h, op, psi) / (kI * w)).real();
    bound += 10.0 * b.eigenresidual * norm(op.apply(psi)) / w;
  }
  return with_oracle(std::move(e), oracle, bound);
}

ResidualEntry ext_force_sum_check(const EnergyBreakdown& b, const SystemSpec& spec,
                                  const Tolerances& tol) {
  const double lhs = drive_dipole_sum(b, spec);
  const double f2 = drive_square_sum(spec);
  const double rhs = b.drive + f2;
  ResidualEntry e = make_entry("ext_force_sum", lhs - rhs,
                               std::abs(lhs) + std::abs(b.drive) + f2, tol.get("ext_force_sum"));
  std::ostringstream note;
  note.precision(17);
  note << "lhs=" << lhs << " rhs=" << rhs;
  e.note = note.str();
  return e;
}

ResidualEntry combined_virial_residual(const EnergyBreakdown& b, const SystemSpec& spec,
                                       const Tolerances& tol) {
  (void)spec;
  double diff = 0.0, mscale = 0.0;
  for (const auto& m : b.modes) {
    diff += m.omega2_p_squared - m.q_squared;
    mscale += std::abs(m.omega2_p_squared) + std::abs(m.q_squared);
  }
  const double fermion = 2.0 * b.kinetic + b.interaction_virial - 2.0 * b.self_energy - b.r_grad_v;
  const double photon = -diff - b.drive;
  const double residual = fermion - photon;
  const double scale = 2.0 * std::abs(b.kinetic) + std::abs(b.interaction_virial) +
                       2.0 * std::abs(b.self_energy) + std::abs(b.r_grad_v) + mscale +
                       std::abs(b.drive);
  ResidualEntry e = make_entry("combined_virial", residual, scale, tol.get("combined"));

  const double elec = 2.0 * b.kinetic + b.interaction_virial - b.coupling - 2.0 * b.self_energy -
                      b.r_grad_v;
  const double mode = diff + b.coupling + b.drive;
  const double mismatch = std::abs(residual - (elec + mode));
  const bool consistent = mismatch <= 1e-12 * std::max(scale + std::abs(b.coupling), kScaleFloor);
  std::ostringstream note;
  note.precision(3);
  note << "electronic plus field-mode mismatch " << mismatch;
  e.note = note.str();
  e.pass = e.pass && consistent;
  return e;
}

// ---------------------------------------------------------------- positivity

std::vector<ResidualEntry> positivity_estimate_check(const OperatorBuilder& builder,
                                                     const ComplexVector& psi,
                                                     const EnergyBreakdown& b,
                                                     const Tolerances& tol) {
  std::vector<ResidualEntry> out;
  const double scale = b.term_scale();
  const double t1 = tol.get("positivity_term");
  out.push_back(make_entry("positivity:kinetic", b.kinetic, scale, t1, true));
  out.push_back(make_entry("positivity:interaction", b.interaction, scale, t1, true));
  out.push_back(make_entry("positivity:self_energy", b.self_energy, scale, t1, true));
  out.push_back(make_entry("positivity:field_energy", b.field, scale, t1, true));
  out.push_back(make_entry("positivity:field_coupling_self_energy",
                           b.field + b.coupling + b.self_energy, scale, tol.get("positivity"), true));

  const SystemSpec& spec = builder.spec();
  if (spec.modes.empty()) return out;
  const ProductBasis& basis = builder.basis();
  const int particles = basis.particles();
  ComplexVector full(static_cast<Eigen::Index>(basis.full_dimension()));
  if (particles == 2)
    basis.expand({psi.data(), static_cast<std::size_t>(psi.size())},
                 {full.data(), static_cast<std::size_t>(full.size())});
  else
    full = psi;

  double lhs = 0.0, rhs = 0.0, gap_scale = 0.0;
  for (std::size_t a = 0; a < spec.modes.size(); ++a) {
    const int m = static_cast<int>(a);
    const double w = spec.modes[a].omega;
    const double q2 = b.modes[a].q_squared;
    lhs += 0.5 * particles * q2;
    rhs += b.modes[a].mixed;
    gap_scale += 0.5 * particles * std::abs(q2) + std::abs(b.modes[a].mixed);
    for (int j = 0; j < particles; ++j) {
      const SparseOperator g = builder.coupling_gradient(m, j, false, Representation::full);
      const SparseOperator gq = builder.coupling_gradient(m, j, true, Representation::full);
      const double grad2 = std::pow(norm(g.apply(full)), 2) / (w * w);
      const double cross = (-2.0 * kI / w * expectation(gq, full)).real();
      const double value = grad2 + q2 + cross;
      lhs += 0.5 * grad2;
      gap_scale += 0.5 * grad2;
      out.push_back(make_entry("square_positivity[" + std::to_string(a) + "][" + std::to_string(j) + "]",
                               value, grad2 + std::abs(q2) + std::abs(cross), tol.get("positivity"),
                               true));
    }
  }
  ResidualEntry gap = make_entry("estimate_gap", lhs - rhs, gap_scale, tol.get("positivity"), true);
  std::ostringstream note;
  note.precision(17);
  note << "lhs=" << lhs << " rhs=" << rhs;
  gap.note = note.str();
  out.push_back(std::move(gap));
  return out;
}

// ---------------------------------------------------------------- mass renormalization

MassRenormResult mass_renorm(const FreeSpaceModeSetSpec& spec) {
  if (!(spec.box_length > 0.0) || !(spec.speed_of_light > 0.0) || !(spec.cutoff > 0.0))
    throw ConfigError("box length, cutoff and speed of light must be positive");
  const double c = spec.speed_of_light;
  const double dk = spec.lattice_spacing();
  const double radius = spec.cutoff / dk;
  const double limit = radius * radius * (1.0 + 1e-12);
  const int m_max = static_cast<int>(std::floor(radius * (1.0 + 1e-12)));
  const double lam2 = spec.coupling() * spec.coupling();

  // Sum over lattice shells in order of |m|^2 for a reproducible total.
  std::vector<std::size_t> shell(static_cast<std::size_t>(limit) + 1, 0);
  for (int i = -m_max; i <= m_max; ++i)
    for (int j = -m_max; j <= m_max; ++j)
      for (int k = -m_max; k <= m_max; ++k) {
        const long m2 = long(i) * i + long(j) * j + long(k) * k;
        if (m2 == 0 || static_cast<double>(m2) > limit) continue;
        ++shell[static_cast<std::size_t>(m2)];
      }

  MassRenormResult r;
  double sum = 0.0;
  for (std::size_t m2 = 1; m2 < shell.size(); ++m2) {
    if (shell[m2] == 0) continue;
    const double omega = c * dk * std::sqrt(static_cast<double>(m2));
    sum += 2.0 * static_cast<double>(shell[m2]) * lam2 / (omega * omega);
    r.mode_count += 2 * shell[m2];
  }
  if (r.mode_count == 0) throw ConfigError("cutoff below lowest mode");
  r.mu_discrete = sum / 3.0;
  r.mu_continuum = 4.0 * spec.cutoff / (3.0 * std::numbers::pi * c * c);
  r.cutoff = spec.cutoff;
  r.box_length = spec.box_length;
  r.speed_of_light = c;
  r.relative_deviation = (r.mu_discrete - r.mu_continuum) / r.mu_continuum;
  return r;
}

double mass_renorm_discrete(const std::vector<ModeSpec>& modes) {
  if (modes.empty()) throw ConfigError("cutoff below lowest mode");
  double s = 0.0;
  for (const auto& m : modes) {
    double l2 = 0.0;
    for (double x : m.lambda) l2 += x * x;
    s += l2 / (m.omega * m.omega);
  }
  return s / 3.0;
}

IsotropicCoupling isotropic_coupling(const SystemSpec& spec) {
  const int d = spec.electrons.dims;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (const auto& m : spec.modes) {
    const Eigen::Map<const Eigen::VectorXd> l(m.lambda.data(), d);
    s += l * l.transpose() / (m.omega * m.omega);
  }
  IsotropicCoupling out;
  out.mu = s.trace() / d;
  const double off = (s - out.mu * Eigen::MatrixXd::Identity(d, d)).norm();
  out.isotropic = off <= 1e-10 * std::max(std::abs(out.mu), kScaleFloor);
  return out;
}

IsotropicInequality isotropic_virial_inequality(const SystemSpec& spec, const EnergyBreakdown& b,
                                                double mu, const Tolerances& tol) {
  IsotropicInequality r;
  r.mu = mu;
  r.isotropic = isotropic_coupling(spec).isotropic;
  double q2 = 0.0;
  for (const auto& m : b.modes) q2 += m.q_squared;
  const double hd = mixed_self_energy(b);
  const double base = mu * b.kinetic + 0.5 * spec.electrons.count * q2 + b.coupling + 2.0 * hd;
  const double ext = b.drive + drive_square_sum(spec);
  r.value_minus = base - ext;
  r.value_plus = base + ext;
  const double scale = std::abs(mu * b.kinetic) + 0.5 * spec.electrons.count * std::abs(q2) +
                       std::abs(b.coupling) + 2.0 * std::abs(hd) + std::abs(b.drive) +
                       drive_square_sum(spec);
  r.entry = make_entry("isotropic_inequality", r.value_minus, scale, tol.get("isotropic"), true);
  r.entry.paper_form_residual = r.value_plus;
  r.entry.note = r.isotropic ? "isotropic coupling" : "non-isotropic mode set";
  return r;
}

// ---------------------------------------------------------------- report

bool VirialReport::all_pass() const {
  if (!gate_pass) return false;
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

const ResidualEntry& VirialReport::find(const std::string& identity) const {
  for (const auto& e : entries)
    if (e.identity == identity) return e;
  throw Error("no report entry named '" + identity + "'");
}

VirialReport virial_report(const SystemSpec& spec, const ComplexVector& psi, const Tolerances& tol,
                           const MeanFieldParams* mean_field) {
  const OperatorBuilder builder(spec);
  VirialReport r;
  r.breakdown = energy_breakdown(builder, psi, tol, mean_field);
  const EnergyBreakdown& b = r.breakdown;
  r.gate_pass = b.eigenstate && b.max_imaginary <= tol.get("imaginary") * std::max(b.term_scale(), 1.0);

  r.entries.push_back(make_entry("term_sum", b.term_sum() - b.total, b.term_scale(), 1e-12));
  r.entries.push_back(electronic_virial_residual(builder, psi, b, tol, mean_field));
  r.entries.push_back(field_mode_virial_residual(builder, psi, b, tol, mean_field));
  for (std::size_t a = 0; a < spec.modes.size(); ++a)
    r.entries.push_back(force_balance_residual(builder, psi, b, static_cast<int>(a), tol, mean_field));
  r.entries.push_back(mixed_virial_residual(builder, psi, b, tol, mean_field));
  r.entries.push_back(ext_force_sum_check(b, spec, tol));
  r.entries.push_back(combined_virial_residual(b, spec, tol));
  for (auto& e : positivity_estimate_check(builder, psi, b, tol)) r.entries.push_back(std::move(e));
  if (!spec.modes.empty()) {
    const IsotropicCoupling iso = isotropic_coupling(spec);
    r.entries.push_back(isotropic_virial_inequality(spec, b, iso.mu, tol).entry);
  }
  return r;
}

// ---------------------------------------------------------------- serialization

nlohmann::json to_json(const EnergyBreakdown& b) {
  nlohmann::json j;
  j["kinetic"] = b.kinetic;
  j["external_potential"] = b.potential;
  j["interaction"] = b.interaction;
  j["field_energy"] = b.field;
  j["dipole_coupling"] = b.coupling;
  j["dipole_self_energy"] = b.self_energy;
  j["external_drive"] = b.drive;
  j["total"] = b.total;
  j["r_grad_v"] = b.r_grad_v;
  j["interaction_virial"] = b.interaction_virial;
  j["interaction_kernel"] = b.interaction_kernel;
  j["eigenresidual"] = b.eigenresidual;
  j["eigenstate"] = b.eigenstate;
  j["max_imaginary"] = b.max_imaginary;
  j["mean_field"] = b.mean_field;
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : b.modes) {
    modes.push_back({{"q", m.q},
                     {"p", m.p},
                     {"q_squared", m.q_squared},
                     {"omega2_p_squared", m.omega2_p_squared},
                     {"dipole", m.dipole},
                     {"dipole_squared", m.dipole_squared},
                     {"mixed", m.mixed}});
  }
  j["modes"] = modes;
  return j;
}

nlohmann::json to_json(const ResidualEntry& e) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["identity"] = e.identity;
  j["residual"] = e.residual;
  j["scale"] = e.scale;
  j["relative"] = e.relative;
  j["tolerance"] = e.tolerance;
  j["kind"] = e.lower_bound ? "lower_bound" : "identity";
  j["oracle"] = opt(e.oracle);
  j["oracle_bound"] = opt(e.oracle_bound);
  j["paper_form_residual"] = opt(e.paper_form_residual);
  j["note"] = e.note;
  j["pass"] = e.pass;
  return j;
}

nlohmann::json to_json(const VirialReport& r) {
  nlohmann::json j;
  j["breakdown"] = to_json(r.breakdown);
  j["gate_pass"] = r.gate_pass;
  j["pass"] = r.all_pass();
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) entries.push_back(to_json(e));
  j["identities"] = entries;
  return j;
}

nlohmann::json to_json(const MassRenormResult& m) {
  return {{"mu_continuum", m.mu_continuum},
          {"mu_discrete", m.mu_discrete},
          {"cutoff", m.cutoff},
          {"box_length", m.box_length},
          {"c", m.speed_of_light},
          {"mode_count", m.mode_count},
          {"relative_deviation", m.relative_deviation}};
}

std::string to_csv(const VirialReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::string out = "identity,residual,scale,relative,tolerance,oracle,oracle_bound,paper_form_residual,pass\n";
  for (const auto& e : r.entries) {
    out += e.identity;
    out += ',' + format_double(e.residual) + ',' + format_double(e.scale) + ',' +
           format_double(e.relative) + ',' + format_double(e.tolerance) + ',' + opt(e.oracle) +
           ',' + opt(e.oracle_bound) + ',' + opt(e.paper_form_residual) + ',' +
           (e.pass ? "true" : "false") + '\n';
  }
  return out;
}

}  // namespace pfv
