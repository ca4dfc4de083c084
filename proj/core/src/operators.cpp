#include "pfv/operators.hpp"

#include <cmath>

#include "pfv/parallel.hpp"
#include "term_kernel.hpp"

namespace pfv {

using detail::ElectronAction;
using detail::ModeFactor;
using detail::TensorTerm;
using detail::TermSet;

namespace {

constexpr std::size_t kChunk = 4096;

std::span<const Complex> view(const ComplexVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<Complex> view(ComplexVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

using Table = std::shared_ptr<const std::vector<double>>;

Table share(std::vector<double> v) { return std::make_shared<const std::vector<double>>(std::move(v)); }

TensorTerm diagonal_term(const std::vector<double>& table, Complex c = 1.0) {
  TensorTerm t;
  t.coefficient = c;
  t.action = ElectronAction::diagonal;
  t.diagonal = share(table);
  return t;
}

TensorTerm mode_term(int mode, const ComplexMatrix& matrix, Complex c = 1.0) {
  TensorTerm t;
  t.coefficient = c;
  t.mode = ModeFactor{mode, detail::to_triplets(matrix)};
  return t;
}

}  // namespace

// ---------------------------------------------------------------- SparseOperator

SparseOperator::SparseOperator(std::size_t dimension, ApplyFunction apply, bool hermitian,
                               std::string label)
    : dimension_(dimension), apply_(std::move(apply)), hermitian_(hermitian), label_(std::move(label)) {}

SparseOperator SparseOperator::from_triplets(std::size_t dimension, std::vector<Triplet> entries,
                                             bool hermitian, std::string label) {
  for (const auto& t : entries)
    if (t.row >= dimension || t.col >= dimension) throw DimensionMismatch("triplet out of range");
  auto shared = std::make_shared<const std::vector<Triplet>>(entries);
  SparseOperator op(
      dimension,
      [shared](std::span<const Complex> x, std::span<Complex> y) {
        std::fill(y.begin(), y.end(), Complex{});
        for (const auto& t : *shared) y[t.row] += t.value * x[t.col];
      },
      hermitian, std::move(label));
  op.triplets_ = std::move(entries);
  op.diagonal_ = [shared, dimension] {
    ComplexVector d = ComplexVector::Zero(static_cast<Eigen::Index>(dimension));
    for (const auto& t : *shared)
      if (t.row == t.col) d[static_cast<Eigen::Index>(t.row)] += t.value;
    return d;
  };
  return op;
}

SparseOperator SparseOperator::from_terms(std::shared_ptr<const TermSet> terms, bool hermitian,
                                          std::string label) {
  SparseOperator op(
      terms->dimension(),
      [terms](std::span<const Complex> x, std::span<Complex> y) { terms->apply(x, y); }, hermitian,
      std::move(label));
  op.terms_ = terms;
  op.diagonal_ = [terms] { return terms->diagonal(); };
  return op;
}

SparseOperator SparseOperator::zero(std::size_t dimension, std::string label) {
  return from_triplets(dimension, {}, true, std::move(label));
}

SparseOperator SparseOperator::identity(std::size_t dimension) {
  SparseOperator op(
      dimension, [](std::span<const Complex> x, std::span<Complex> y) { std::copy(x.begin(), x.end(), y.begin()); },
      true, "identity");
  op.diagonal_ = [dimension] { return ComplexVector::Ones(static_cast<Eigen::Index>(dimension)); };
  return op;
}

void SparseOperator::apply(std::span<const Complex> x, std::span<Complex> y) const {
  if (x.size() != dimension_ || y.size() != dimension_)
    throw DimensionMismatch("operator '" + label_ + "': dimension mismatch");
  apply_(x, y);
}

ComplexVector SparseOperator::apply(const ComplexVector& x) const {
  ComplexVector y(x.size());
  apply(view(x), view(y));
  return y;
}

ComplexVector SparseOperator::diagonal() const {
  if (!diagonal_) throw Error("operator '" + label_ + "' has no cheap diagonal");
  return diagonal_();
}

SparseOperator SparseOperator::scaled(Complex factor) const {
  const bool herm = hermitian_ && factor.imag() == 0.0;
  if (terms_) {
    auto terms = terms_->terms();
    for (auto& t : terms) t.coefficient *= factor;
    return from_terms(std::make_shared<const TermSet>(terms_->basis_ptr(), std::move(terms),
                                                      terms_->full_representation()),
                      herm, label_);
  }
  if (triplets_) {
    auto entries = *triplets_;
    for (auto& t : entries) t.value *= factor;
    return from_triplets(dimension_, std::move(entries), herm, label_);
  }
  auto inner = apply_;
  SparseOperator op(
      dimension_,
      [inner, factor](std::span<const Complex> x, std::span<Complex> y) {
        inner(x, y);
        for (auto& v : y) v *= factor;
      },
      herm, label_);
  if (diagonal_) {
    auto d = diagonal_;
    op.diagonal_ = [d, factor] { return ComplexVector(d() * factor); };
  }
  return op;
}

SparseOperator SparseOperator::with_label(std::string label) const {
  SparseOperator op = *this;
  op.label_ = std::move(label);
  return op;
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  if (a.dimension_ != b.dimension_) throw DimensionMismatch("operator sum: dimension mismatch");
  const bool herm = a.hermitian_ && b.hermitian_;
  std::string label = a.label_ + "+" + b.label_;
  if (a.terms_ && b.terms_ && a.terms_->basis_ptr() == b.terms_->basis_ptr() &&
      a.terms_->full_representation() == b.terms_->full_representation()) {
    auto terms = a.terms_->terms();
    const auto& more = b.terms_->terms();
    terms.insert(terms.end(), more.begin(), more.end());
    return SparseOperator::from_terms(
        std::make_shared<const TermSet>(a.terms_->basis_ptr(), std::move(terms),
                                        a.terms_->full_representation()),
        herm, std::move(label));
  }
  auto fa = a.apply_;
  auto fb = b.apply_;
  SparseOperator op(
      a.dimension_,
      [fa, fb](std::span<const Complex> x, std::span<Complex> y) {
        std::vector<Complex> tmp(y.size());
        fa(x, y);
        fb(x, tmp);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += tmp[i];
      },
      herm, std::move(label));
  if (a.diagonal_ && b.diagonal_) {
    auto da = a.diagonal_;
    auto db = b.diagonal_;
    op.diagonal_ = [da, db] { return ComplexVector(da() + db()); };
  }
  return op;
}

SparseOperator compose(const SparseOperator& outer, const SparseOperator& inner, bool hermitian) {
  if (outer.dimension_ != inner.dimension_) throw DimensionMismatch("compose: dimension mismatch");
  auto fo = outer.apply_;
  auto fi = inner.apply_;
  return SparseOperator(
      outer.dimension_,
      [fo, fi](std::span<const Complex> x, std::span<Complex> y) {
        std::vector<Complex> tmp(y.size());
        fi(x, tmp);
        fo(tmp, y);
      },
      hermitian, outer.label_ + "*" + inner.label_);
}

// ---------------------------------------------------------------- ladders

LadderMatrices mode_ladder_matrices(const ModeSpec& mode) {
  if (mode.n_max < 1) throw ConfigError("mode n_max must be at least 1");
  const int n = mode.n_max + 1;
  const double w = mode.omega;
  auto ladders = [w](int size) {
    ComplexMatrix a = ComplexMatrix::Zero(size, size);
    for (int k = 1; k < size; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const ComplexMatrix ad = a.adjoint();
    ComplexMatrix q = std::sqrt(w / 2.0) * (a + ad);
    ComplexMatrix p = Complex(0.0, 1.0 / std::sqrt(2.0 * w)) * (ad - a);
    return std::pair{q, p};
  };
  auto [q, p] = ladders(n);
  auto [q1, p1] = ladders(n + 1);
  LadderMatrices out;
  out.q = q;
  out.p = p;
  out.q_squared = (q1 * q1).topLeftCorner(n, n);
  out.p_squared = (p1 * p1).topLeftCorner(n, n);
  return out;
}

std::string term_name(TermId id) {
  switch (id) {
    case TermId::Kinetic:
      return "kinetic";
    case TermId::ExternalPotential:
      return "external_potential";
    case TermId::Interaction:
      return "interaction";
    case TermId::FieldEnergy:
      return "field_energy";
    case TermId::DipoleCoupling:
      return "dipole_coupling";
    case TermId::DipoleSelfEnergy:
      return "dipole_self_energy";
    case TermId::ExternalDrive:
      return "external_drive";
    case TermId::Total:
      return "total";
    case TermId::TotalTransformed:
      return "total_transformed";
  }
  return "unknown";
}

// ---------------------------------------------------------------- builder

OperatorBuilder::OperatorBuilder(const SystemSpec& spec)
    : spec_(spec), basis_(std::make_shared<const ProductBasis>(spec)) {
  SystemSpec electronic = spec;
  electronic.modes.clear();
  electronic_basis_ = std::make_shared<const ProductBasis>(electronic);

  for (const auto& m : spec.modes) ladders_.push_back(mode_ladder_matrices(m));

  const ProductBasis& b = *basis_;
  const std::size_t n = b.grid_size();
  const int d = b.dims();
  std::vector<double> v1(n), rgv1(n);
  std::vector<std::vector<double>> dip1(spec.modes.size(), std::vector<double>(n));
  std::vector<double> grad(d);
  for (std::size_t g = 0; g < n; ++g) {
    const auto r = b.position(g);
    v1[g] = potential_value(spec.potential, r, g);
    potential_gradient(spec.potential, r, g, grad);
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += r[k] * grad[k];
    rgv1[g] = s;
    for (std::size_t a = 0; a < spec.modes.size(); ++a) {
      double dd = 0.0;
      for (int k = 0; k < d; ++k) dd += spec.modes[a].lambda[k] * r[k];
      dip1[a][g] = dd;
    }
  }

  const std::size_t nE = b.full_electronic_dimension();
  v_.resize(nE);
  r_grad_v_.resize(nE);
  w_.assign(nE, 0.0);
  w_virial_.assign(nE, 0.0);
  dipole_.assign(spec.modes.size(), std::vector<double>(nE));
  self_energy_.assign(nE, 0.0);
  std::vector<double> sep(d);
  const double cell = b.mean_spacing();
  for (std::size_t e = 0; e < nE; ++e) {
    double v = 0.0, rg = 0.0;
    for (int p = 0; p < b.particles(); ++p) {
      const std::size_t g = b.particle_point(e, p);
      v += v1[g];
      rg += rgv1[g];
    }
    v_[e] = v;
    r_grad_v_[e] = rg;
    for (std::size_t a = 0; a < spec.modes.size(); ++a) {
      double dd = 0.0;
      for (int p = 0; p < b.particles(); ++p) dd += dip1[a][b.particle_point(e, p)];
      dipole_[a][e] = dd;
      self_energy_[e] += 0.5 * dd * dd;
    }
    if (b.particles() == 2) {
      const auto r1 = b.position(b.particle_point(e, 0));
      const auto r2 = b.position(b.particle_point(e, 1));
      for (int k = 0; k < d; ++k) sep[k] = r1[k] - r2[k];
      w_[e] = interaction_value(spec.interaction, sep, cell);
      w_virial_[e] = interaction_kernel(spec.interaction, sep, cell);
    }
  }
}

void OperatorBuilder::check_mode(int mode) const {
  if (mode < 0 || static_cast<std::size_t>(mode) >= spec_.modes.size())
    throw Error("unknown mode index " + std::to_string(mode));
}

SparseOperator OperatorBuilder::make(std::vector<TensorTerm> terms, bool hermitian, std::string label,
                                     Representation rep,
                                     std::shared_ptr<const ProductBasis> basis) const {
  return SparseOperator::from_terms(
      std::make_shared<const TermSet>(basis ? std::move(basis) : basis_, std::move(terms),
                                      rep == Representation::full),
      hermitian, std::move(label));
}

SparseOperator OperatorBuilder::term(TermId id, const MeanFieldParams* mean_field) const {
  const auto& modes = spec_.modes;
  const int count = static_cast<int>(modes.size());
  const bool classical = spec_.field_treatment == FieldTreatment::classical;
  std::vector<TensorTerm> terms;
  switch (id) {
    case TermId::Kinetic: {
      TensorTerm t;
      t.action = ElectronAction::laplacian;
      terms.push_back(t);
      break;
    }
    case TermId::ExternalPotential:
      terms.push_back(diagonal_term(v_));
      break;
    case TermId::Interaction:
      if (basis_->particles() == 2) terms.push_back(diagonal_term(w_));
      break;
    case TermId::FieldEnergy:
      for (int a = 0; a < count; ++a) {
        const int levels = modes[a].n_max + 1;
        ComplexMatrix hb = ComplexMatrix::Zero(levels, levels);
        for (int k = 0; k < levels; ++k) hb(k, k) = modes[a].omega * (k + 0.5);
        terms.push_back(mode_term(a, hb));
      }
      break;
    case TermId::DipoleCoupling:
      if (!classical) {
        for (int a = 0; a < count; ++a) {
          TensorTerm t = diagonal_term(dipole_[a], -modes[a].omega);
          t.mode = ModeFactor{a, detail::to_triplets(ladders_[a].p)};
          terms.push_back(t);
        }
        break;
      }
      if (!mean_field || mean_field->displacement.size() != modes.size() ||
          mean_field->dipole.size() != modes.size())
        throw Error("classical dipole coupling needs mean-field displacement and dipole per mode");
      for (int a = 0; a < count; ++a) {
        const double w = modes[a].omega;
        const double p = mean_field->displacement[a];
        const double dd = mean_field->dipole[a];
        terms.push_back(mode_term(a, ladders_[a].p, -w * dd));
        terms.push_back(diagonal_term(dipole_[a], -w * p));
        TensorTerm shift;
        shift.coefficient = w * dd * p;
        terms.push_back(shift);
      }
      break;
    case TermId::DipoleSelfEnergy:
      terms.push_back(diagonal_term(self_energy_));
      break;
    case TermId::ExternalDrive:
      for (int a = 0; a < count; ++a)
        terms.push_back(mode_term(a, ladders_[a].p, modes[a].drive / modes[a].omega));
      break;
    case TermId::Total: {
      SparseOperator total = term(TermId::Kinetic);
      for (TermId t : kHamiltonianTerms)
        if (t != TermId::Kinetic) total = total + term(t, mean_field);
      return total.with_label("total");
    }
    case TermId::TotalTransformed: {
      if (classical) throw Error("invalid term for field treatment: total_transformed needs quantum modes");
      SparseOperator total = term(TermId::Kinetic) + term(TermId::ExternalPotential) +
                             term(TermId::Interaction) + term(TermId::ExternalDrive);
      for (int a = 0; a < count; ++a) {
        const double w = modes[a].omega;
        const auto& L = ladders_[a];
        // B = omega p - D, squared by composition; the truncated p.p differs
        // from the exact square only in the last Fock level.
        SparseOperator b = make({mode_term(a, L.p, w), diagonal_term(dipole_[a], -1.0)}, true, "B");
        const ComplexMatrix boundary = 0.5 * w * w * (L.p_squared - L.p * L.p);
        const ComplexMatrix q_half = 0.5 * L.q_squared;
        total = total + compose(b, b, true).scaled(0.5) +
                make({mode_term(a, boundary), mode_term(a, q_half)}, true, "q^2/2");
      }
      return total.with_label("total_transformed");
    }
  }
  return make(std::move(terms), true, term_name(id));
}

SparseOperator OperatorBuilder::virial(VirialKind kind, int mode) const {
  switch (kind) {
    case VirialKind::electronic: {
      TensorTerm t;
      t.action = ElectronAction::virial_gradient;
      return make({t}, false, "electronic_virial");
    }
    case VirialKind::mode: {
      std::vector<TensorTerm> terms;
      for (std::size_t a = 0; a < spec_.modes.size(); ++a)
        terms.push_back(mode_term(static_cast<int>(a), ladders_[a].q * ladders_[a].p));
      return make(std::move(terms), false, "mode_virial");
    }
    case VirialKind::mixed: {
      check_mode(mode);
      TensorTerm t = diagonal_term(dipole_[mode]);
      t.mode = ModeFactor{mode, detail::to_triplets(ladders_[mode].q)};
      return make({t}, false, "mixed_virial");
    }
  }
  throw Error("unknown virial kind");
}

SparseOperator OperatorBuilder::mode_matrix(int mode, const ComplexMatrix& matrix, bool hermitian,
                                            Representation rep) const {
  check_mode(mode);
  const int levels = spec_.modes[mode].n_max + 1;
  if (matrix.rows() != levels || matrix.cols() != levels)
    throw DimensionMismatch("mode matrix has the wrong size");
  return make({mode_term(mode, matrix)}, hermitian, "mode_matrix", rep);
}

SparseOperator OperatorBuilder::dipole(int mode) const {
  check_mode(mode);
  return make({diagonal_term(dipole_[mode])}, true, "dipole");
}

SparseOperator OperatorBuilder::dipole_squared(int mode) const {
  check_mode(mode);
  std::vector<double> sq(dipole_[mode].size());
  for (std::size_t e = 0; e < sq.size(); ++e) sq[e] = dipole_[mode][e] * dipole_[mode][e];
  return make({diagonal_term(sq)}, true, "dipole_squared");
}

SparseOperator OperatorBuilder::position_dot_force() const {
  return make({diagonal_term(r_grad_v_)}, true, "r_grad_v");
}

SparseOperator OperatorBuilder::interaction_virial() const {
  if (basis_->particles() == 1) return make({}, true, "interaction_virial");
  return make({diagonal_term(w_virial_)}, true, "interaction_virial");
}

SparseOperator OperatorBuilder::coupling_gradient(int mode, int particle, bool with_q,
                                                  Representation rep) const {
  check_mode(mode);
  TensorTerm t;
  t.action = ElectronAction::gradient;
  t.direction = spec_.modes[mode].lambda;
  t.particle = particle;
  if (with_q) t.mode = ModeFactor{mode, detail::to_triplets(ladders_[mode].q)};
  return make({t}, false, "coupling_gradient", rep);
}

SparseOperator OperatorBuilder::electronic_meanfield(const std::vector<double>& displacement) const {
  if (displacement.size() != spec_.modes.size())
    throw DimensionMismatch("one displacement per mode is required");
  std::vector<TensorTerm> terms;
  TensorTerm kinetic;
  kinetic.action = ElectronAction::laplacian;
  terms.push_back(kinetic);
  terms.push_back(diagonal_term(v_));
  if (basis_->particles() == 2) terms.push_back(diagonal_term(w_));
  terms.push_back(diagonal_term(self_energy_));
  for (std::size_t a = 0; a < spec_.modes.size(); ++a)
    terms.push_back(diagonal_term(dipole_[a], -spec_.modes[a].omega * displacement[a]));
  return make(std::move(terms), true, "electronic_meanfield", Representation::reduced,
              electronic_basis_);
}

std::vector<double> OperatorBuilder::electronic_dipoles(const ComplexVector& electronic) const {
  const ProductBasis& b = *electronic_basis_;
  if (static_cast<std::size_t>(electronic.size()) != b.dimension())
    throw DimensionMismatch("electronic state has the wrong dimension");
  std::vector<double> out(spec_.modes.size(), 0.0);
  for (std::size_t a = 0; a < out.size(); ++a) {
    double s = 0.0;
    for (std::size_t e = 0; e < b.dimension(); ++e)
      s += std::norm(electronic[static_cast<Eigen::Index>(e)]) * dipole_[a][b.full_configuration(e)];
    out[a] = s;
  }
  return out;
}

SparseOperator build_term(const SystemSpec& spec, TermId id, const MeanFieldParams* mean_field) {
  hilbert_dimension(spec);
  return OperatorBuilder(spec).term(id, mean_field);
}

SparseOperator build_virial_operator(const SystemSpec& spec, VirialKind kind, int mode) {
  hilbert_dimension(spec);
  return OperatorBuilder(spec).virial(kind, mode);
}

// ---------------------------------------------------------------- reductions

Complex inner_product(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw DimensionMismatch("inner product: dimension mismatch");
  const std::size_t chunks = (a.size() + kChunk - 1) / kChunk;
  std::vector<Complex> partial(chunks);
  parallel_for(chunks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = std::min(a.size(), lo + kChunk);
      Complex s{};
      for (std::size_t i = lo; i < hi; ++i) s += std::conj(a[i]) * b[i];
      partial[c] = s;
    }
  });
  Complex total{};
  for (const auto& s : partial) total += s;
  return total;
}

Complex inner_product(const ComplexVector& a, const ComplexVector& b) {
  return inner_product(view(a), view(b));
}

double norm(const ComplexVector& v) { return std::sqrt(inner_product(v, v).real()); }

Complex expectation(const SparseOperator& op, const ComplexVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != op.dimension())
    throw DimensionMismatch("expectation: dimension mismatch");
  return inner_product(psi, op.apply(psi));
}

Complex expectation(const SparseOperator& op, const QuantumState& psi) {
  return expectation(op, psi.coefficients);
}

Complex commutator_expectation(const SparseOperator& h, const SparseOperator& a,
                               const ComplexVector& psi) {
  if (h.dimension() != a.dimension() || static_cast<std::size_t>(psi.size()) != h.dimension())
    throw DimensionMismatch("commutator expectation: dimension mismatch");
  const ComplexVector hpsi = h.apply(psi);
  const ComplexVector apsi = a.apply(psi);
  const ComplexVector ahpsi = a.apply(hpsi);
  return inner_product(hpsi, apsi) - inner_product(psi, ahpsi);
}

}  // namespace pfv
