#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pfv/model.hpp"
#include "pfv/types.hpp"

namespace pfv {

// Index layout of the product space: electronic configuration outside,
// mixed-radix Fock index inside (last mode fastest).
//
// For two electrons the reduced basis holds one coefficient per unordered
// pair (a <= b, or a < b for the antisymmetric sector). Operators act on the
// "full" layout with ordered pairs (a, b), index a*n + b, and the
// expand/compress pair maps between the two.
class ProductBasis {
 public:
  explicit ProductBasis(const SystemSpec& spec);

  int particles() const { return particles_; }
  int dims() const { return dims_; }
  Exchange exchange() const { return exchange_; }

  std::size_t grid_size() const { return n_; }
  std::size_t electronic_dimension() const { return reduced_configs_; }
  std::size_t full_electronic_dimension() const { return full_configs_; }
  std::size_t mode_dimension() const { return mode_dim_; }
  std::size_t dimension() const { return reduced_configs_ * mode_dim_; }
  std::size_t full_dimension() const { return full_configs_ * mode_dim_; }

  double spacing(int axis) const { return spacing_[axis]; }
  double cell_volume() const;
  double mean_spacing() const;
  int axis_points(int axis) const { return points_[axis]; }
  std::size_t axis_stride(int axis) const { return axis_stride_[axis]; }
  int coordinate_index(std::size_t point, int axis) const {
    return index_[point * dims_ + axis];
  }
  double coordinate(std::size_t point, int axis) const { return coords_[point * dims_ + axis]; }
  std::span<const double> position(std::size_t point) const {
    return {coords_.data() + point * dims_, static_cast<std::size_t>(dims_)};
  }

  // Stride of one particle's grid index within the full electronic index.
  std::size_t particle_stride(int particle) const {
    return particles_ == 2 && particle == 0 ? n_ : 1;
  }
  // Grid point of a particle in a full electronic configuration.
  std::size_t particle_point(std::size_t full_config, int particle) const {
    return particles_ == 2 && particle == 0 ? full_config / n_ : full_config % n_;
  }

  std::size_t mode_count() const { return levels_.size(); }
  int mode_levels(std::size_t mode) const { return levels_[mode]; }
  std::size_t mode_stride(std::size_t mode) const { return mode_stride_[mode]; }
  int occupation(std::size_t fock_index, std::size_t mode) const {
    return static_cast<int>((fock_index / mode_stride_[mode]) % levels_[mode]);
  }

  // Full electronic index of a reduced configuration.
  std::size_t full_configuration(std::size_t config) const;

  void expand(std::span<const Complex> reduced, std::span<Complex> full) const;
  void compress(std::span<const Complex> full, std::span<Complex> reduced) const;

 private:
  int particles_;
  int dims_;
  Exchange exchange_;
  std::size_t n_;
  std::size_t reduced_configs_;
  std::size_t full_configs_;
  std::size_t mode_dim_;
  std::vector<double> spacing_;
  std::vector<int> points_;
  std::vector<std::size_t> axis_stride_;
  std::vector<int> index_;
  std::vector<double> coords_;
  std::vector<int> levels_;
  std::vector<std::size_t> mode_stride_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
};

}  // namespace pfv
