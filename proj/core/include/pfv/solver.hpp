#pragma once

#include <cstdint>
#include <vector>

#include "pfv/model.hpp"
#include "pfv/operators.hpp"

namespace pfv {

struct EigenSolveConfig {
  int count = 1;  // number of lowest eigenpairs
  int max_iterations = 20000;  // Lanczos matrix-vector products
  int krylov_dimension = 400;
  double tolerance = 1e-10;  // on ||H psi - E psi||
  std::uint64_t seed = 20240611;
  std::size_t dense_cap = 5000;

  void validate() const;
};

// Dense path. Probes H column by column; banded Hamiltonians (the usual case)
// go through a band eigenvalue solver plus inverse iteration.
std::vector<QuantumState> dense_eigensolve(const SystemSpec& spec, const EigenSolveConfig& config);
// `phases` holds k such that basis vector j is rotated by i^k before the
// solve; an empty vector means no rotation.
std::vector<QuantumState> dense_eigensolve(const SparseOperator& h, const EigenSolveConfig& config,
                                           const std::vector<int>& phases = {});

QuantumState lanczos_ground_state(const SystemSpec& spec, const EigenSolveConfig& config);
std::vector<QuantumState> lanczos_lowest(const SparseOperator& h, const EigenSolveConfig& config);

// Dense below the cap, Lanczos above.
QuantumState ground_state(const SystemSpec& spec, const EigenSolveConfig& config);
QuantumState ground_state(const SparseOperator& h, const EigenSolveConfig& config,
                          const std::vector<int>& phases = {});

// Total Fock occupation of every basis vector, mod 4. Rotating by i^n makes
// the length-gauge Hamiltonian real.
std::vector<int> fock_phases(const ProductBasis& basis);

// ||H psi - <H> psi||.
double eigenstate_residual(const SparseOperator& h, const ComplexVector& psi);
double eigenstate_residual(const SystemSpec& spec, const ComplexVector& psi);

// max(|E0|, max |diag H|).
double spectral_scale(const SparseOperator& h, double e0);

// Rotates psi so its largest-magnitude coefficient is real and positive.
void fix_global_phase(ComplexVector& psi);

struct ScfConfig {
  double mixing = 0.5;
  double tolerance = 1e-10;
  int max_cycles = 500;
  EigenSolveConfig eigen;

  void validate() const;
};

struct MeanFieldSolution {
  QuantumState electronic;  // on the electron-only basis
  std::vector<double> displacement;  // <p_a>
  std::vector<double> dipole;  // sum_i <lambda_a . r_i>
  std::vector<ComplexVector> mode_states;  // Fock coefficients per mode
  std::vector<double> mode_energies;
  double total_energy = 0.0;
  int cycles = 0;
  bool converged = false;

  MeanFieldParams params() const { return {displacement, dipole}; }
};

MeanFieldSolution scf_meanfield(const SystemSpec& spec, const ScfConfig& config);

// Product of the electronic state and the mode states on the full basis.
ComplexVector meanfield_product_state(const SystemSpec& spec, const MeanFieldSolution& solution);

}  // namespace pfv
