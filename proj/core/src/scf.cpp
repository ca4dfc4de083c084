#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "pfv/solver.hpp"

namespace pfv {

namespace {

// Ground state of H_b + g p in one mode's Fock space.
std::pair<ComplexVector, double> shifted_mode(const ModeSpec& mode, double g) {
  const LadderMatrices L = mode_ladder_matrices(mode);
  const int levels = mode.n_max + 1;
  ComplexMatrix h = g * L.p;
  for (int k = 0; k < levels; ++k) h(k, k) += mode.omega * (k + 0.5);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw Error("mode eigenvalue solver failed");
  ComplexVector phi = solver.eigenvectors().col(0);
  fix_global_phase(phi);
  return {phi, solver.eigenvalues()[0]};
}

}  // namespace

void ScfConfig::validate() const {
  if (!(mixing > 0.0 && mixing <= 1.0)) throw ConfigError("mixing factor must lie in (0, 1]");
  if (!(tolerance > 0.0)) throw ConfigError("scf tolerance must be positive");
  if (max_cycles < 1) throw ConfigError("max cycles must be positive");
  eigen.validate();
}

MeanFieldSolution scf_meanfield(const SystemSpec& spec, const ScfConfig& config) {
  config.validate();
  if (spec.field_treatment != FieldTreatment::classical)
    throw ConfigError("mean-field solve needs field_treatment = classical");
  hilbert_dimension(spec);
  const OperatorBuilder builder(spec);
  const auto& modes = spec.modes;
  const std::size_t count = modes.size();

  auto displacement_of = [&](const std::vector<double>& d) {
    std::vector<double> p(count);
    for (std::size_t a = 0; a < count; ++a) {
      const double w = modes[a].omega;
      p[a] = d[a] / w - modes[a].drive / (w * w * w);
    }
    return p;
  };

  MeanFieldSolution sol;
  std::vector<double> d(count, 0.0);
  std::vector<double> changes;
  for (int cycle = 1; cycle <= config.max_cycles; ++cycle) {
    const std::vector<double> p = displacement_of(d);
    const SparseOperator h = builder.electronic_meanfield(p);
    QuantumState electronic = ground_state(h, config.eigen);
    const std::vector<double> fresh = builder.electronic_dipoles(electronic.coefficients);
    double change = 0.0;
    for (std::size_t a = 0; a < count; ++a) change = std::max(change, std::abs(fresh[a] - d[a]));
    changes.push_back(change);
    sol.cycles = cycle;

    if (change <= config.tolerance) {
      sol.electronic = std::move(electronic);
      sol.displacement = p;
      sol.dipole = fresh;
      sol.converged = true;
      break;
    }
    if (changes.size() >= 10) {
      bool rising = true;
      for (std::size_t k = changes.size() - 9; k < changes.size(); ++k)
        rising = rising && changes[k] >= changes[k - 1];
      if (rising) throw NotConverged("scf oscillation detected", change);
    }
    for (std::size_t a = 0; a < count; ++a)
      d[a] = (1.0 - config.mixing) * d[a] + config.mixing * fresh[a];
  }
  if (!sol.converged)
    throw NotConverged("scf did not converge within " + std::to_string(config.max_cycles) + " cycles",
                       changes.empty() ? 0.0 : changes.back());

  sol.total_energy = sol.electronic.energy;
  for (std::size_t a = 0; a < count; ++a) {
    const double w = modes[a].omega;
    // Mode sees H_b + (f/w - w d) p; the product state is then an exact
    // eigenstate of the mean-field Hamiltonian.
    auto [phi, e] = shifted_mode(modes[a], modes[a].drive / w - w * sol.dipole[a]);
    sol.mode_states.push_back(std::move(phi));
    sol.mode_energies.push_back(e);
    sol.total_energy += e + w * sol.dipole[a] * sol.displacement[a];
  }
  return sol;
}

ComplexVector meanfield_product_state(const SystemSpec& spec, const MeanFieldSolution& solution) {
  const ProductBasis basis(spec);
  const std::size_t M = basis.mode_dimension();
  const std::size_t E = basis.electronic_dimension();
  if (static_cast<std::size_t>(solution.electronic.coefficients.size()) != E ||
      solution.mode_states.size() != basis.mode_count())
    throw DimensionMismatch("mean-field solution does not match the spec");
  ComplexVector fock = ComplexVector::Ones(static_cast<Eigen::Index>(M));
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t a = 0; a < basis.mode_count(); ++a)
      fock[static_cast<Eigen::Index>(m)] *= solution.mode_states[a][basis.occupation(m, a)];
  ComplexVector out(static_cast<Eigen::Index>(E * M));
  for (std::size_t e = 0; e < E; ++e)
    out.segment(static_cast<Eigen::Index>(e * M), static_cast<Eigen::Index>(M)) =
        solution.electronic.coefficients[static_cast<Eigen::Index>(e)] * fock;
  return out;
}

}  // namespace pfv
