#include "pfv/basis.hpp"

#include <cmath>
#include <numbers>

namespace pfv {

ProductBasis::ProductBasis(const SystemSpec& spec)
    : particles_(spec.electrons.count),
      dims_(spec.electrons.dims),
      exchange_(spec.electrons.exchange),
      n_(spec.grid.size()) {
  if (particles_ < 1 || particles_ > 2) throw ConfigError("electron count must be 1 or 2");
  if (spec.grid.dims() != dims_) throw ConfigError("grid dimensionality does not match electrons.dims");

  spacing_.resize(dims_);
  points_ = spec.grid.points;
  axis_stride_.assign(dims_, 1);
  for (int k = dims_ - 1; k >= 0; --k) {
    spacing_[k] = spec.grid.spacing(k);
    if (k + 1 < dims_) axis_stride_[k] = axis_stride_[k + 1] * points_[k + 1];
  }
  index_.resize(n_ * dims_);
  coords_.resize(n_ * dims_);
  for (std::size_t g = 0; g < n_; ++g) {
    for (int k = 0; k < dims_; ++k) {
      const int i = static_cast<int>((g / axis_stride_[k]) % points_[k]);
      index_[g * dims_ + k] = i;
      coords_[g * dims_ + k] = spec.grid.lower[k] + i * spacing_[k];
    }
  }

  if (particles_ == 1) {
    reduced_configs_ = full_configs_ = n_;
  } else {
    full_configs_ = n_ * n_;
    const bool sym = exchange_ == Exchange::symmetric;
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = sym ? a : a + 1; b < n_; ++b)
        pairs_.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
    reduced_configs_ = pairs_.size();
  }

  mode_dim_ = 1;
  levels_.reserve(spec.modes.size());
  for (const auto& m : spec.modes) levels_.push_back(m.n_max + 1);
  mode_stride_.assign(levels_.size(), 1);
  for (std::size_t a = levels_.size(); a-- > 0;) {
    mode_stride_[a] = mode_dim_;
    mode_dim_ *= static_cast<std::size_t>(levels_[a]);
  }
}

double ProductBasis::cell_volume() const {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

double ProductBasis::mean_spacing() const { return std::pow(cell_volume(), 1.0 / dims_); }

std::size_t ProductBasis::full_configuration(std::size_t config) const {
  if (particles_ == 1) return config;
  const auto [a, b] = pairs_[config];
  return static_cast<std::size_t>(a) * n_ + b;
}

void ProductBasis::expand(std::span<const Complex> reduced, std::span<Complex> full) const {
  if (reduced.size() != dimension() || full.size() != full_dimension())
    throw DimensionMismatch("expand: dimension mismatch");
  if (particles_ == 1) {
    std::copy(reduced.begin(), reduced.end(), full.begin());
    return;
  }
  std::fill(full.begin(), full.end(), Complex{});
  const double r = std::numbers::sqrt2 / 2.0;
  const double s = exchange_ == Exchange::symmetric ? r : -r;
  const std::size_t M = mode_dim_;
  for (std::size_t e = 0; e < pairs_.size(); ++e) {
    const auto [a, b] = pairs_[e];
    const Complex* c = reduced.data() + e * M;
    Complex* ab = full.data() + (static_cast<std::size_t>(a) * n_ + b) * M;
    if (a == b) {
      std::copy(c, c + M, ab);
      continue;
    }
    Complex* ba = full.data() + (static_cast<std::size_t>(b) * n_ + a) * M;
    for (std::size_t m = 0; m < M; ++m) {
      ab[m] = r * c[m];
      ba[m] = s * c[m];
    }
  }
}

void ProductBasis::compress(std::span<const Complex> full, std::span<Complex> reduced) const {
  if (reduced.size() != dimension() || full.size() != full_dimension())
    throw DimensionMismatch("compress: dimension mismatch");
  if (particles_ == 1) {
    std::copy(full.begin(), full.end(), reduced.begin());
    return;
  }
  const double r = std::numbers::sqrt2 / 2.0;
  const double s = exchange_ == Exchange::symmetric ? r : -r;
  const std::size_t M = mode_dim_;
  for (std::size_t e = 0; e < pairs_.size(); ++e) {
    const auto [a, b] = pairs_[e];
    Complex* c = reduced.data() + e * M;
    const Complex* ab = full.data() + (static_cast<std::size_t>(a) * n_ + b) * M;
    if (a == b) {
      std::copy(ab, ab + M, c);
      continue;
    }
    const Complex* ba = full.data() + (static_cast<std::size_t>(b) * n_ + a) * M;
    for (std::size_t m = 0; m < M; ++m) c[m] = r * ab[m] + s * ba[m];
  }
}

}  // namespace pfv
