#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pfv/basis.hpp"
#include "pfv/operators.hpp"

namespace pfv::detail {

// Matrix on one mode's Fock space, identity on the others.
struct ModeFactor {
  int mode = -1;
  std::vector<Triplet> entries;
};

enum class ElectronAction { identity, diagonal, laplacian, gradient, virial_gradient };

// coefficient * (electron action) (x) (mode factor or identity).
//   laplacian:       -1/2 sum_i del_i^2 (central, hard wall)
//   gradient:        sum over selected particles of direction . del_i (central)
//   virial_gradient: sum_i r_i . del_i (central)
//   diagonal:        values over full electronic configurations
struct TensorTerm {
  Complex coefficient{1.0, 0.0};
  ElectronAction action = ElectronAction::identity;
  std::shared_ptr<const std::vector<double>> diagonal;
  std::vector<double> direction;
  int particle = -1;
  std::optional<ModeFactor> mode;
};

class TermSet {
 public:
  TermSet(std::shared_ptr<const ProductBasis> basis, std::vector<TensorTerm> terms, bool full);

  const ProductBasis& basis() const { return *basis_; }
  const std::shared_ptr<const ProductBasis>& basis_ptr() const { return basis_; }
  bool full_representation() const { return full_; }
  const std::vector<TensorTerm>& terms() const { return terms_; }
  std::size_t dimension() const;

  void apply(std::span<const Complex> x, std::span<Complex> y) const;
  ComplexVector diagonal() const;

 private:
  void apply_full(std::span<const Complex> x, std::span<Complex> y) const;
  void apply_term(const TensorTerm& t, const Complex* x, Complex* y, Complex* scratch) const;

  std::shared_ptr<const ProductBasis> basis_;
  std::vector<TensorTerm> terms_;
  bool full_;
};

std::vector<Triplet> to_triplets(const ComplexMatrix& m);

}  // namespace pfv::detail
