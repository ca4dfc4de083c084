#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pfv {

enum class Exchange { none, symmetric, antisymmetric };
enum class FieldTreatment { quantum, classical };

struct ElectronSpec {
  int count = 1;
  int dims = 1;
  Exchange exchange = Exchange::none;
};

// Uniform grid, endpoints included. Row-major: the last axis varies fastest.
struct GridSpec {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> points;

  int dims() const { return static_cast<int>(points.size()); }
  double spacing(int axis) const;
  std::size_t size() const;
};

namespace potential {
// v = k r^2 / 2
struct Harmonic {
  double k = 1.0;
};
// v = -Z / sqrt(r^2 + a^2)
struct SoftCoulombWell {
  double charge = 1.0;
  double softening = 1.0;
};
// v = sum over axes of sum_n c_n x^n
struct Polynomial {
  std::vector<double> coefficients;
};
// Values per grid point; gradient[axis][point].
struct Tabulated {
  std::vector<double> values;
  std::vector<std::vector<double>> gradient;
};
}  // namespace potential

using PotentialSpec = std::variant<potential::Harmonic, potential::SoftCoulombWell,
                                   potential::Polynomial, potential::Tabulated>;

namespace interaction {
struct None {};
// w = 1/|r|
struct Coulomb3d {};
// w = 1/sqrt(r^2 + a^2)
struct SoftCoulomb {
  double softening = 1.0;
};
// w(|r|) and dw/d|r| on an ascending distance table, linearly interpolated.
struct Tabulated {
  std::vector<double> distance;
  std::vector<double> value;
  std::vector<double> derivative;
};
}  // namespace interaction

using InteractionSpec = std::variant<interaction::None, interaction::Coulomb3d,
                                     interaction::SoftCoulomb, interaction::Tabulated>;

struct ModeSpec {
  double omega = 1.0;
  std::vector<double> lambda;
  double drive = 0.0;
  int n_max = 1;
};

struct SystemSpec {
  ElectronSpec electrons;
  GridSpec grid;
  PotentialSpec potential = potential::Harmonic{};
  InteractionSpec interaction = interaction::None{};
  std::vector<ModeSpec> modes;
  FieldTreatment field_treatment = FieldTreatment::quantum;
};

struct FreeSpaceModeSetSpec {
  double box_length = 1.0;
  double cutoff = 1.0;
  double speed_of_light = 137.036;

  double omega0() const;    // 2 pi c / L
  double coupling() const;  // sqrt(4 pi / L^3)
  double lattice_spacing() const { return omega0() / speed_of_light; }
};

inline constexpr std::size_t kDefaultDimensionCap = 5'000'000;

std::vector<std::string> validate_system(const SystemSpec& spec,
                                         std::size_t cap = kDefaultDimensionCap);

// Number of spatial configurations of the electrons (after exchange reduction).
std::size_t electronic_dimension(const SystemSpec& spec);
std::size_t mode_dimension(const SystemSpec& spec);
std::size_t hilbert_dimension(const SystemSpec& spec, std::size_t cap = kDefaultDimensionCap);

std::vector<ModeSpec> freespace_mode_set(const FreeSpaceModeSetSpec& spec);

// Evaluation helpers shared by operators and tests.
double potential_value(const PotentialSpec& v, std::span<const double> r, std::size_t point);
void potential_gradient(const PotentialSpec& v, std::span<const double> r, std::size_t point,
                        std::span<double> out);

// cell is the mean grid spacing; used to regularize coulomb3d at zero separation.
double interaction_value(const InteractionSpec& w, std::span<const double> separation,
                         double cell);
// Virial kernel -r.grad w(r).
double interaction_kernel(const InteractionSpec& w, std::span<const double> separation,
                          double cell);
std::string interaction_kernel_label(const InteractionSpec& w);

}  // namespace pfv
