#include "term_kernel.hpp"

#include <algorithm>

#include "pfv/parallel.hpp"

namespace pfv::detail {

namespace {

void apply_mode(const ProductBasis& b, const ModeFactor& f, const Complex* in, Complex* out,
                Complex c) {
  const std::size_t M = b.mode_dimension();
  const std::size_t s = b.mode_stride(f.mode);
  const std::size_t K = static_cast<std::size_t>(b.mode_levels(f.mode));
  const std::size_t outer = M / (K * s);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t base = o * K * s + i;
      for (const auto& t : f.entries) out[base + t.row * s] += c * t.value * in[base + t.col * s];
    }
  }
}

}  // namespace

TermSet::TermSet(std::shared_ptr<const ProductBasis> basis, std::vector<TensorTerm> terms,
                 bool full)
    : basis_(std::move(basis)), terms_(std::move(terms)), full_(full) {}

std::size_t TermSet::dimension() const {
  return full_ ? basis_->full_dimension() : basis_->dimension();
}

void TermSet::apply(std::span<const Complex> x, std::span<Complex> y) const {
  if (x.size() != dimension() || y.size() != dimension())
    throw DimensionMismatch("operator application: dimension mismatch");
  if (full_ || basis_->particles() == 1) {
    apply_full(x, y);
    return;
  }
  std::vector<Complex> fx(basis_->full_dimension());
  std::vector<Complex> fy(basis_->full_dimension());
  basis_->expand(x, fx);
  apply_full(fx, fy);
  basis_->compress(fy, y);
}

void TermSet::apply_full(std::span<const Complex> x, std::span<Complex> y) const {
  std::fill(y.begin(), y.end(), Complex{});
  std::vector<Complex> scratch;
  for (const auto& t : terms_) {
    const bool needs_scratch = t.mode && t.action != ElectronAction::identity &&
                               t.action != ElectronAction::diagonal;
    if (needs_scratch && scratch.empty()) scratch.resize(x.size());
    apply_term(t, x.data(), y.data(), scratch.data());
  }
}

void TermSet::apply_term(const TensorTerm& t, const Complex* x, Complex* y,
                         Complex* scratch) const {
  const ProductBasis& b = *basis_;
  const std::size_t M = b.mode_dimension();
  const std::size_t nE = b.full_electronic_dimension();
  const Complex c = t.coefficient;

  if (t.action == ElectronAction::identity || t.action == ElectronAction::diagonal) {
    const std::vector<double>* diag =
        t.action == ElectronAction::diagonal ? t.diagonal.get() : nullptr;
    parallel_for(nE, [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e) {
        const Complex ce = diag ? c * (*diag)[e] : c;
        if (ce == Complex{}) continue;
        const Complex* xe = x + e * M;
        Complex* ye = y + e * M;
        if (t.mode) {
          apply_mode(b, *t.mode, xe, ye, ce);
        } else {
          for (std::size_t m = 0; m < M; ++m) ye[m] += ce * xe[m];
        }
      }
    });
    return;
  }

  const Complex* src = x;
  if (t.mode) {
    const std::size_t total = nE * M;
    std::fill(scratch, scratch + total, Complex{});
    parallel_for(nE, [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e)
        apply_mode(b, *t.mode, x + e * M, scratch + e * M, Complex{1.0, 0.0});
    });
    src = scratch;
  }

  const int dims = b.dims();
  const int particles = b.particles();
  parallel_for(nE, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      Complex* ye = y + e * M;
      const Complex* xe = src + e * M;
      for (int p = 0; p < particles; ++p) {
        if (t.particle >= 0 && t.particle != p) continue;
        const std::size_t g = b.particle_point(e, p);
        const std::size_t ps = b.particle_stride(p);
        for (int k = 0; k < dims; ++k) {
          const int i = b.coordinate_index(g, k);
          const std::size_t step = ps * b.axis_stride(k) * M;
          const bool has_lo = i > 0;
          const bool has_hi = i + 1 < b.axis_points(k);
          const Complex* lo = has_lo ? xe - step : nullptr;
          const Complex* hi = has_hi ? xe + step : nullptr;
          const double h = b.spacing(k);
          if (t.action == ElectronAction::laplacian) {
            const Complex w = c * (-0.5 / (h * h));
            for (std::size_t m = 0; m < M; ++m) {
              Complex acc = -2.0 * xe[m];
              if (lo) acc += lo[m];
              if (hi) acc += hi[m];
              ye[m] += w * acc;
            }
          } else {
            const double factor = t.action == ElectronAction::gradient ? t.direction[k]
                                                                       : b.coordinate(g, k);
            if (factor == 0.0) continue;
            const Complex w = c * (factor / (2.0 * h));
            for (std::size_t m = 0; m < M; ++m) {
              Complex acc{};
              if (hi) acc += hi[m];
              if (lo) acc -= lo[m];
              ye[m] += w * acc;
            }
          }
        }
      }
    }
  });
}

ComplexVector TermSet::diagonal() const {
  const ProductBasis& b = *basis_;
  const std::size_t M = b.mode_dimension();
  const std::size_t configs = full_ ? b.full_electronic_dimension() : b.electronic_dimension();
  double laplacian_diag = 0.0;
  for (int k = 0; k < b.dims(); ++k) laplacian_diag += 1.0 / (b.spacing(k) * b.spacing(k));

  ComplexVector d = ComplexVector::Zero(static_cast<Eigen::Index>(configs * M));
  for (const auto& t : terms_) {
    for (std::size_t e = 0; e < configs; ++e) {
      const std::size_t fe = full_ ? e : b.full_configuration(e);
      Complex ce;
      switch (t.action) {
        case ElectronAction::identity:
          ce = t.coefficient;
          break;
        case ElectronAction::diagonal:
          ce = t.coefficient * (*t.diagonal)[fe];
          break;
        case ElectronAction::laplacian: {
          const int count = t.particle >= 0 ? 1 : b.particles();
          ce = t.coefficient * (laplacian_diag * count);
          break;
        }
        default:
          ce = Complex{};
      }
      if (ce == Complex{}) continue;
      for (std::size_t m = 0; m < M; ++m) {
        Complex md{1.0, 0.0};
        if (t.mode) {
          md = Complex{};
          const auto occ = static_cast<std::size_t>(b.occupation(m, t.mode->mode));
          for (const auto& tr : t.mode->entries)
            if (tr.row == occ && tr.col == occ) md += tr.value;
        }
        d[static_cast<Eigen::Index>(e * M + m)] += ce * md;
      }
    }
  }
  return d;
}

std::vector<Triplet> to_triplets(const ComplexMatrix& m) {
  std::vector<Triplet> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != Complex{})
        out.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j)});
  return out;
}

}  // namespace pfv::detail
