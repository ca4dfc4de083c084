#include "pfv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pfv/types.hpp"

namespace pfv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool finite(double x) { return std::isfinite(x); }

bool all_finite(const std::vector<double>& xs) {
  return std::all_of(xs.begin(), xs.end(), finite);
}

double squared_norm(std::span<const double> r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

// Mean of 1/r over a unit cell centred on the origin, in d dimensions.
// In 1D the mean diverges; the value at half a spacing is used instead.
double coincident_coulomb_factor(std::size_t dims) {
  switch (dims) {
    case 1:
      return 2.0;
    case 2:
      return 4.0 * std::log(1.0 + std::numbers::sqrt2);
    default:
      return 2.3800772;
  }
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

bool checked_multiply(std::size_t a, std::size_t b, std::size_t& out) {
  return !__builtin_mul_overflow(a, b, &out);
}

double max_pair_distance(const GridSpec& grid) {
  double s = 0.0;
  for (int k = 0; k < grid.dims(); ++k) {
    double extent = grid.upper[k] - grid.lower[k];
    s += extent * extent;
  }
  return std::sqrt(s);
}

}  // namespace

double GridSpec::spacing(int axis) const {
  return (upper.at(axis) - lower.at(axis)) / (points.at(axis) - 1);
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int p : points) n *= static_cast<std::size_t>(std::max(p, 0));
  return n;
}

double FreeSpaceModeSetSpec::omega0() const {
  return 2.0 * std::numbers::pi * speed_of_light / box_length;
}

double FreeSpaceModeSetSpec::coupling() const {
  return std::sqrt(4.0 * std::numbers::pi / (box_length * box_length * box_length));
}

std::vector<std::string> validate_system(const SystemSpec& spec, std::size_t cap) {
  std::vector<std::string> out;
  const auto& e = spec.electrons;
  const int d = e.dims;

  if (e.count < 1) out.emplace_back("electron count must be positive");
  if (e.count > 2) out.emplace_back("at most 2 electrons are supported");
  if (d < 1 || d > 3) out.emplace_back("dims must be 1, 2, or 3");
  if (e.count == 1 && e.exchange != Exchange::none)
    out.emplace_back("exchange must be none for N=1");
  if (e.count == 2 && e.exchange == Exchange::none)
    out.emplace_back("exchange must be symmetric or antisymmetric for N=2");

  const auto& g = spec.grid;
  bool grid_ok = true;
  if (static_cast<int>(g.lower.size()) != d || static_cast<int>(g.upper.size()) != d ||
      g.dims() != d) {
    out.emplace_back("grid must provide min, max and points for every axis");
    grid_ok = false;
  } else {
    for (int k = 0; k < d; ++k) {
      if (g.points[k] < 8) {
        out.push_back("grid axis " + std::to_string(k) + " needs at least 8 points");
        grid_ok = false;
      }
      if (!finite(g.lower[k]) || !finite(g.upper[k]) || !(g.upper[k] > g.lower[k])) {
        out.push_back("grid axis " + std::to_string(k) + " must have max > min");
        grid_ok = false;
      }
    }
  }

  std::visit(
      overloaded{
          [&](const potential::Harmonic& p) {
            if (!finite(p.k)) out.emplace_back("harmonic k must be finite");
          },
          [&](const potential::SoftCoulombWell& p) {
            if (!finite(p.charge)) out.emplace_back("softcoulomb_well charge must be finite");
            if (!(p.softening > 0.0) || !finite(p.softening))
              out.emplace_back("softcoulomb_well softening must be positive");
          },
          [&](const potential::Polynomial& p) {
            if (p.coefficients.empty())
              out.emplace_back("polynomial potential needs at least one coefficient");
            if (!all_finite(p.coefficients))
              out.emplace_back("polynomial coefficients must be finite");
          },
          [&](const potential::Tabulated& p) {
            if (!grid_ok) return;
            if (p.values.size() != g.size())
              out.emplace_back("tabulated potential must have one value per grid point");
            if (static_cast<int>(p.gradient.size()) != d) {
              out.emplace_back("tabulated potential gradient must have one array per axis");
            } else {
              for (const auto& axis : p.gradient)
                if (axis.size() != g.size()) {
                  out.emplace_back("tabulated potential gradient must cover every grid point");
                  break;
                }
            }
            bool ok = all_finite(p.values);
            for (const auto& axis : p.gradient) ok = ok && all_finite(axis);
            if (!ok) out.emplace_back("tabulated potential must be finite");
          },
      },
      spec.potential);

  const bool no_interaction = std::holds_alternative<interaction::None>(spec.interaction);
  if (e.count == 1 && !no_interaction) out.emplace_back("interaction must be none for N=1");
  if (const auto* w = std::get_if<interaction::SoftCoulomb>(&spec.interaction)) {
    if (!(w->softening > 0.0) || !finite(w->softening))
      out.emplace_back("softcoulomb softening must be positive");
  }
  if (const auto* w = std::get_if<interaction::Tabulated>(&spec.interaction)) {
    const auto n = w->distance.size();
    if (n < 2 || w->value.size() != n || w->derivative.size() != n) {
      out.emplace_back("tabulated interaction needs matching r, w, dw arrays of length >= 2");
    } else {
      bool ascending = true;
      for (std::size_t i = 1; i < n; ++i) ascending = ascending && w->distance[i] > w->distance[i - 1];
      if (!ascending) out.emplace_back("tabulated interaction distances must be strictly ascending");
      if (!all_finite(w->distance) || !all_finite(w->value) || !all_finite(w->derivative))
        out.emplace_back("tabulated interaction must be finite");
      if (grid_ok && (w->distance.front() > 0.0 ||
                      w->distance.back() < max_pair_distance(g) * (1.0 - 1e-12)))
        out.emplace_back("tabulated interaction must cover distances from 0 to the grid diagonal");
    }
  }

  for (std::size_t a = 0; a < spec.modes.size(); ++a) {
    const auto& m = spec.modes[a];
    if (!(m.omega > 0.0) || !finite(m.omega)) out.emplace_back("mode frequency must be positive");
    if (m.n_max < 1) out.emplace_back("mode n_max must be at least 1");
    if (static_cast<int>(m.lambda.size()) != d)
      out.emplace_back("mode coupling vector must have one component per dimension");
    if (!all_finite(m.lambda) || !finite(m.drive))
      out.emplace_back("mode coupling and drive must be finite");
  }

  if (out.empty()) {
    try {
      hilbert_dimension(spec, cap);
    } catch (const CapExceeded&) {
      out.emplace_back("dimension exceeds cap");
    }
  }
  return out;
}

std::size_t electronic_dimension(const SystemSpec& spec) {
  const std::size_t n = spec.grid.size();
  if (spec.electrons.count == 1) return n;
  if (spec.electrons.exchange == Exchange::symmetric) return n * (n + 1) / 2;
  return n * (n - 1) / 2;
}

std::size_t mode_dimension(const SystemSpec& spec) {
  std::size_t m = 1;
  for (const auto& mode : spec.modes) {
    if (!checked_multiply(m, static_cast<std::size_t>(mode.n_max) + 1, m))
      throw CapExceeded("dimension exceeds cap");
  }
  return m;
}

std::size_t hilbert_dimension(const SystemSpec& spec, std::size_t cap) {
  std::size_t dim = 0;
  if (!checked_multiply(electronic_dimension(spec), mode_dimension(spec), dim) || dim > cap)
    throw CapExceeded("dimension exceeds cap");
  return dim;
}

std::vector<ModeSpec> freespace_mode_set(const FreeSpaceModeSetSpec& spec) {
  if (!(spec.box_length > 0.0) || !(spec.speed_of_light > 0.0))
    throw ConfigError("box length and speed of light must be positive");
  const double dk = spec.lattice_spacing();
  const double radius = spec.cutoff / dk;
  const double limit = radius * radius * (1.0 + 1e-12);
  const int m_max = static_cast<int>(std::floor(radius * (1.0 + 1e-12)));
  const double lam = spec.coupling();

  std::vector<ModeSpec> modes;
  for (int i = -m_max; i <= m_max; ++i) {
    for (int j = -m_max; j <= m_max; ++j) {
      for (int k = -m_max; k <= m_max; ++k) {
        const double m2 = double(i) * i + double(j) * j + double(k) * k;
        if (m2 == 0.0 || m2 > limit) continue;
        const double len = std::sqrt(m2);
        const double khat[3] = {i / len, j / len, k / len};

        int axis = 0;
        for (int a = 1; a < 3; ++a)
          if (std::abs(khat[a]) < std::abs(khat[axis])) axis = a;
        double e1[3] = {0.0, 0.0, 0.0};
        e1[axis] = 1.0;
        const double dot = khat[axis];
        for (int a = 0; a < 3; ++a) e1[a] -= dot * khat[a];
        const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
        for (double& x : e1) x /= n1;
        const double e2[3] = {khat[1] * e1[2] - khat[2] * e1[1],
                              khat[2] * e1[0] - khat[0] * e1[2],
                              khat[0] * e1[1] - khat[1] * e1[0]};

        const double omega = spec.speed_of_light * dk * len;
        for (const double* e : {static_cast<const double*>(e1), static_cast<const double*>(e2)}) {
          ModeSpec mode;
          mode.omega = omega;
          mode.lambda = {lam * e[0], lam * e[1], lam * e[2]};
          mode.drive = 0.0;
          mode.n_max = 1;
          modes.push_back(std::move(mode));
        }
      }
    }
  }
  if (modes.empty()) throw ConfigError("cutoff below lowest mode");
  return modes;
}

double potential_value(const PotentialSpec& v, std::span<const double> r, std::size_t point) {
  return std::visit(
      overloaded{
          [&](const potential::Harmonic& p) { return 0.5 * p.k * squared_norm(r); },
          [&](const potential::SoftCoulombWell& p) {
            return -p.charge / std::sqrt(squared_norm(r) + p.softening * p.softening);
          },
          [&](const potential::Polynomial& p) {
            double s = 0.0;
            for (double x : r) {
              double power = 1.0;
              for (double c : p.coefficients) {
                s += c * power;
                power *= x;
              }
            }
            return s;
          },
          [&](const potential::Tabulated& p) { return p.values.at(point); },
      },
      v);
}

void potential_gradient(const PotentialSpec& v, std::span<const double> r, std::size_t point,
                        std::span<double> out) {
  std::visit(overloaded{
                 [&](const potential::Harmonic& p) {
                   for (std::size_t k = 0; k < r.size(); ++k) out[k] = p.k * r[k];
                 },
                 [&](const potential::SoftCoulombWell& p) {
                   const double s = squared_norm(r) + p.softening * p.softening;
                   const double f = p.charge / (s * std::sqrt(s));
                   for (std::size_t k = 0; k < r.size(); ++k) out[k] = f * r[k];
                 },
                 [&](const potential::Polynomial& p) {
                   for (std::size_t k = 0; k < r.size(); ++k) {
                     double s = 0.0;
                     double power = 1.0;
                     for (std::size_t n = 1; n < p.coefficients.size(); ++n) {
                       s += double(n) * p.coefficients[n] * power;
                       power *= r[k];
                     }
                     out[k] = s;
                   }
                 },
                 [&](const potential::Tabulated& p) {
                   for (std::size_t k = 0; k < r.size(); ++k) out[k] = p.gradient.at(k).at(point);
                 },
             },
             v);
}

double interaction_value(const InteractionSpec& w, std::span<const double> separation,
                         double cell) {
  const double r = std::sqrt(squared_norm(separation));
  return std::visit(overloaded{
                        [](const interaction::None&) { return 0.0; },
                        [&](const interaction::Coulomb3d&) {
                          return r > 0.0 ? 1.0 / r
                                         : coincident_coulomb_factor(separation.size()) / cell;
                        },
                        [&](const interaction::SoftCoulomb& s) {
                          return 1.0 / std::sqrt(r * r + s.softening * s.softening);
                        },
                        [&](const interaction::Tabulated& t) {
                          return interpolate(t.distance, t.value, r);
                        },
                    },
                    w);
}

double interaction_kernel(const InteractionSpec& w, std::span<const double> separation,
                          double cell) {
  const double r = std::sqrt(squared_norm(separation));
  return std::visit(overloaded{
                        [](const interaction::None&) { return 0.0; },
                        [&](const interaction::Coulomb3d&) {
                          return r > 0.0 ? 1.0 / r
                                         : coincident_coulomb_factor(separation.size()) / cell;
                        },
                        [&](const interaction::SoftCoulomb& s) {
                          const double q = r * r + s.softening * s.softening;
                          return r * r / (q * std::sqrt(q));
                        },
                        [&](const interaction::Tabulated& t) {
                          return -r * interpolate(t.distance, t.derivative, r);
                        },
                    },
                    w);
}

std::string interaction_kernel_label(const InteractionSpec& w) {
  return std::visit(overloaded{
                        [](const interaction::None&) { return std::string("none"); },
                        [](const interaction::Coulomb3d&) { return std::string("coulomb"); },
                        [](const interaction::SoftCoulomb&) { return std::string("generalized"); },
                        [](const interaction::Tabulated&) { return std::string("generalized"); },
                    },
                    w);
}

}  // namespace pfv
