#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfv/basis.hpp"
#include "pfv/model.hpp"
#include "pfv/types.hpp"

namespace pfv {

namespace detail {
class TermSet;
struct TensorTerm;
}  // namespace detail

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  Complex value;
};

class SparseOperator {
 public:
  using ApplyFunction = std::function<void(std::span<const Complex>, std::span<Complex>)>;

  SparseOperator() = default;
  SparseOperator(std::size_t dimension, ApplyFunction apply, bool hermitian, std::string label = {});

  static SparseOperator from_triplets(std::size_t dimension, std::vector<Triplet> entries,
                                      bool hermitian, std::string label = {});
  static SparseOperator from_terms(std::shared_ptr<const detail::TermSet> terms, bool hermitian,
                                   std::string label = {});
  static SparseOperator zero(std::size_t dimension, std::string label = {});
  static SparseOperator identity(std::size_t dimension);

  std::size_t dimension() const noexcept { return dimension_; }
  bool hermitian() const noexcept { return hermitian_; }
  const std::string& label() const noexcept { return label_; }
  const std::optional<std::vector<Triplet>>& triplets() const noexcept { return triplets_; }

  // y = Op x. x and y must not alias.
  void apply(std::span<const Complex> x, std::span<Complex> y) const;
  ComplexVector apply(const ComplexVector& x) const;
  ComplexVector operator()(const ComplexVector& x) const { return apply(x); }

  bool has_diagonal() const noexcept { return static_cast<bool>(diagonal_); }
  ComplexVector diagonal() const;

  SparseOperator scaled(Complex factor) const;
  SparseOperator with_label(std::string label) const;
  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
  // (outer o inner) x = outer(inner(x)).
  friend SparseOperator compose(const SparseOperator& outer, const SparseOperator& inner,
                                bool hermitian);

 private:
  std::size_t dimension_ = 0;
  ApplyFunction apply_;
  bool hermitian_ = false;
  std::string label_;
  std::optional<std::vector<Triplet>> triplets_;
  std::shared_ptr<const detail::TermSet> terms_;
  std::function<ComplexVector()> diagonal_;
};

SparseOperator compose(const SparseOperator& outer, const SparseOperator& inner,
                       bool hermitian = false);

struct QuantumState {
  ComplexVector coefficients;
  double energy = 0.0;
  double eigenresidual = 0.0;
};

enum class TermId {
  Kinetic,
  ExternalPotential,
  Interaction,
  FieldEnergy,
  DipoleCoupling,
  DipoleSelfEnergy,
  ExternalDrive,
  Total,
  TotalTransformed,
};

inline constexpr TermId kHamiltonianTerms[] = {
    TermId::Kinetic,        TermId::ExternalPotential, TermId::Interaction,
    TermId::FieldEnergy,    TermId::DipoleCoupling,    TermId::DipoleSelfEnergy,
    TermId::ExternalDrive,
};

std::string term_name(TermId id);

enum class VirialKind { electronic, mode, mixed };

// Classical-field parameters: mode displacement <p_a> and total dipole
// d_a = sum_i <lambda_a . r_i> used in the mean-field coupling.
struct MeanFieldParams {
  std::vector<double> displacement;
  std::vector<double> dipole;
};

struct LadderMatrices {
  ComplexMatrix q;
  ComplexMatrix p;
  // Squares computed one level above the cutoff and truncated, so that
  // (omega^2 p_squared + q_squared)/2 = omega (n + 1/2) on every retained level.
  ComplexMatrix q_squared;
  ComplexMatrix p_squared;
};

LadderMatrices mode_ladder_matrices(const ModeSpec& mode);

// Which index space an operator acts on. For two electrons, `full` is the
// ordered-pair layout used for single-particle quantities.
enum class Representation { reduced, full };

// Builds every operator of one SystemSpec, sharing the basis and the
// grid-diagonal tables.
class OperatorBuilder {
 public:
  explicit OperatorBuilder(const SystemSpec& spec);

  const SystemSpec& spec() const { return spec_; }
  const ProductBasis& basis() const { return *basis_; }
  std::shared_ptr<const ProductBasis> basis_ptr() const { return basis_; }
  std::size_t dimension() const { return basis_->dimension(); }

  SparseOperator term(TermId id, const MeanFieldParams* mean_field = nullptr) const;
  SparseOperator virial(VirialKind kind, int mode = -1) const;

  // Single-factor pieces used by the virial and qedft modules.
  SparseOperator mode_matrix(int mode, const ComplexMatrix& matrix, bool hermitian,
                             Representation rep = Representation::reduced) const;
  SparseOperator dipole(int mode) const;
  SparseOperator dipole_squared(int mode) const;
  // Sum over particles of r_i . grad v(r_i).
  SparseOperator position_dot_force() const;
  // -sum_{j<k} (r_j - r_k) . grad w(r_j - r_k).
  SparseOperator interaction_virial() const;
  // lambda_a . grad acting on one particle (particle < 0: summed), optionally
  // multiplied by q_a.
  SparseOperator coupling_gradient(int mode, int particle, bool with_q,
                                   Representation rep = Representation::reduced) const;

  // Mean-field electronic Hamiltonian T + V + W + H_d - sum_a omega_a <p_a> D_a
  // on the electron-only space.
  SparseOperator electronic_meanfield(const std::vector<double>& displacement) const;
  const ProductBasis& electronic_basis() const { return *electronic_basis_; }
  // Total dipoles sum_i <lambda_a . r_i> of an electron-only state.
  std::vector<double> electronic_dipoles(const ComplexVector& electronic) const;

  // Grid-diagonal tables over full electronic configurations.
  const std::vector<double>& potential_table() const { return v_; }
  const std::vector<double>& dipole_table(int mode) const { return dipole_.at(mode); }

 private:
  SparseOperator make(std::vector<detail::TensorTerm> terms, bool hermitian, std::string label,
                      Representation rep = Representation::reduced,
                      std::shared_ptr<const ProductBasis> basis = nullptr) const;
  void check_mode(int mode) const;

  SystemSpec spec_;
  std::shared_ptr<const ProductBasis> basis_;
  std::shared_ptr<const ProductBasis> electronic_basis_;
  std::vector<LadderMatrices> ladders_;
  std::vector<double> v_;
  std::vector<double> w_;
  std::vector<double> w_virial_;
  std::vector<double> r_grad_v_;
  std::vector<std::vector<double>> dipole_;
  std::vector<double> self_energy_;
};

SparseOperator build_term(const SystemSpec& spec, TermId id,
                          const MeanFieldParams* mean_field = nullptr);
SparseOperator build_virial_operator(const SystemSpec& spec, VirialKind kind, int mode = -1);

// Inner product <a, b> (conjugate-linear in a). Summed in fixed chunks of
// 4096 entries, chunk partial sums added in index order.
Complex inner_product(std::span<const Complex> a, std::span<const Complex> b);
Complex inner_product(const ComplexVector& a, const ComplexVector& b);
double norm(const ComplexVector& v);

Complex expectation(const SparseOperator& op, const ComplexVector& psi);
Complex expectation(const SparseOperator& op, const QuantumState& psi);

// <H psi, A psi> - <psi, A H psi>.
Complex commutator_expectation(const SparseOperator& h, const SparseOperator& a,
                               const ComplexVector& psi);

}  // namespace pfv
