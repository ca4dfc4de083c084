#include "pfv/qedft.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pfv/basis.hpp"
#include "pfv/json_io.hpp"

namespace pfv {

namespace {

ProductBasis grid_basis(const GridSpec& grid) {
  SystemSpec s;
  s.electrons.count = 1;
  s.electrons.dims = grid.dims();
  s.grid = grid;
  return ProductBasis(s);
}

bool same_grid(const GridSpec& a, const GridSpec& b) {
  if (a.points != b.points || a.dims() != b.dims()) return false;
  for (int k = 0; k < a.dims(); ++k) {
    const double tol = 1e-9 * a.spacing(k);
    if (std::abs(a.lower[k] - b.lower[k]) > tol || std::abs(a.upper[k] - b.upper[k]) > tol)
      return false;
  }
  return true;
}

nlohmann::json grid_json(const GridSpec& g) {
  return {{"min", g.lower}, {"max", g.upper}, {"points", g.points}};
}

}  // namespace

double DensityProfile::integral() const {
  double cell = 1.0;
  for (int k = 0; k < grid.dims(); ++k) cell *= grid.spacing(k);
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell;
}

DensityProfile electron_density(const SystemSpec& spec, const ComplexVector& psi) {
  const ProductBasis basis(spec);
  if (static_cast<std::size_t>(psi.size()) != basis.dimension())
    throw DimensionMismatch("state does not match the system dimension");
  const std::size_t M = basis.mode_dimension();
  DensityProfile rho;
  rho.grid = spec.grid;
  rho.values.assign(basis.grid_size(), 0.0);
  for (std::size_t e = 0; e < basis.electronic_dimension(); ++e) {
    double w = 0.0;
    for (std::size_t m = 0; m < M; ++m) w += std::norm(psi[static_cast<Eigen::Index>(e * M + m)]);
    const std::size_t fe = basis.full_configuration(e);
    for (int p = 0; p < basis.particles(); ++p) rho.values[basis.particle_point(fe, p)] += w;
  }
  const double cell = basis.cell_volume();
  for (double& v : rho.values) v /= cell;
  return rho;
}

double density_distance(const DensityProfile& a, const DensityProfile& b,
                        const std::vector<bool>& mask) {
  if (!same_grid(a.grid, b.grid) || a.values.size() != b.values.size())
    throw DimensionMismatch("densities live on different grids");
  if (!mask.empty() && mask.size() != a.values.size()) throw DimensionMismatch("mask size");
  double cell = 1.0;
  for (int k = 0; k < a.grid.dims(); ++k) cell *= a.grid.spacing(k);
  double s = 0.0;
  for (std::size_t g = 0; g < a.values.size(); ++g) {
    if (!mask.empty() && !mask[g]) continue;
    const double d = a.values[g] - b.values[g];
    s += d * d;
  }
  return std::sqrt(s * cell);
}

AuxiliarySystem invert_potential_single_electron(const DensityProfile& rho, double floor) {
  const ProductBasis basis = grid_basis(rho.grid);
  const std::size_t n = basis.grid_size();
  if (rho.values.size() != n) throw DimensionMismatch("density does not match its grid");
  for (double v : rho.values)
    if (v < 0.0 || !std::isfinite(v)) throw ConfigError("negative density");

  AuxiliarySystem aux;
  aux.grid = rho.grid;
  aux.retained.resize(n);
  std::size_t dropped = 0;
  for (std::size_t g = 0; g < n; ++g) {
    aux.retained[g] = rho.values[g] > floor;
    if (!aux.retained[g]) ++dropped;
  }
  if (2 * dropped > n) throw ConfigError("density floor region covers more than half the grid");

  std::vector<double> root(n);
  for (std::size_t g = 0; g < n; ++g) root[g] = std::sqrt(rho.values[g]);

  aux.potential.assign(n, 0.0);
  for (std::size_t g = 0; g < n; ++g) {
    if (!aux.retained[g]) continue;
    double lap = 0.0;
    for (int k = 0; k < basis.dims(); ++k) {
      const int i = basis.coordinate_index(g, k);
      const std::size_t s = basis.axis_stride(k);
      const double lo = i > 0 ? root[g - s] : 0.0;
      const double hi = i + 1 < basis.axis_points(k) ? root[g + s] : 0.0;
      const double h = basis.spacing(k);
      lap += (lo + hi - 2.0 * root[g]) / (h * h);
    }
    aux.potential[g] = lap / (2.0 * root[g]);
  }

  for (std::size_t g = 0; g < n; ++g) {
    if (aux.retained[g]) continue;
    double best = std::numeric_limits<double>::infinity();
    std::size_t nearest = g;
    const auto r = basis.position(g);
    for (std::size_t t = 0; t < n; ++t) {
      if (!aux.retained[t]) continue;
      const auto u = basis.position(t);
      double d2 = 0.0;
      for (int k = 0; k < basis.dims(); ++k) d2 += (r[k] - u[k]) * (r[k] - u[k]);
      if (d2 < best) {
        best = d2;
        nearest = t;
      }
    }
    aux.potential[g] = aux.potential[nearest];
  }

  const double shift = *std::min_element(aux.potential.begin(), aux.potential.end());
  for (double& v : aux.potential) v -= shift;
  return aux;
}

std::vector<double> aux_mode_forces(const std::vector<double>& displacement,
                                    const std::vector<ModeSpec>& modes) {
  if (displacement.size() != modes.size())
    throw DimensionMismatch("one displacement per mode is required");
  std::vector<double> f(modes.size());
  for (std::size_t a = 0; a < modes.size(); ++a) {
    const double w = modes[a].omega;
    if (!(w > 0.0)) throw ConfigError("mode frequency must be positive");
    f[a] = -w * w * w * displacement[a];
  }
  return f;
}

potential::Tabulated tabulate_potential(const GridSpec& grid, std::vector<double> values) {
  const ProductBasis basis = grid_basis(grid);
  const std::size_t n = basis.grid_size();
  if (values.size() != n) throw DimensionMismatch("potential does not match its grid");
  potential::Tabulated t;
  t.gradient.assign(basis.dims(), std::vector<double>(n, 0.0));
  for (int k = 0; k < basis.dims(); ++k) {
    const std::size_t s = basis.axis_stride(k);
    const double h = basis.spacing(k);
    for (std::size_t g = 0; g < n; ++g) {
      const int i = basis.coordinate_index(g, k);
      if (i == 0)
        t.gradient[k][g] = (values[g + s] - values[g]) / h;
      else if (i + 1 == basis.axis_points(k))
        t.gradient[k][g] = (values[g] - values[g - s]) / h;
      else
        t.gradient[k][g] = (values[g + s] - values[g - s]) / (2.0 * h);
    }
  }
  t.values = std::move(values);
  return t;
}

SystemSpec auxiliary_spec(const SystemSpec& full, const AuxiliarySystem& aux) {
  if (!same_grid(full.grid, aux.grid)) throw DimensionMismatch("auxiliary potential grid differs");
  if (aux.forces.size() != full.modes.size())
    throw DimensionMismatch("one auxiliary force per mode is required");
  SystemSpec s = full;
  s.potential = tabulate_potential(full.grid, aux.potential);
  s.interaction = interaction::None{};
  s.field_treatment = FieldTreatment::quantum;
  for (std::size_t a = 0; a < s.modes.size(); ++a) {
    std::fill(s.modes[a].lambda.begin(), s.modes[a].lambda.end(), 0.0);
    s.modes[a].drive = aux.forces[a];
  }
  return s;
}

KsIdentityReport ks_virial_identities(const SystemSpec& full, const ComplexVector& full_state,
                                      const SystemSpec& aux, const ComplexVector& aux_state,
                                      const Tolerances& tol) {
  if (full.modes.size() != aux.modes.size()) throw DimensionMismatch("mode lists differ");
  const OperatorBuilder fb(full);
  const OperatorBuilder ab(aux);
  KsIdentityReport r;

  const DensityProfile rho = electron_density(full, full_state);
  const DensityProfile rho_s = electron_density(aux, aux_state);
  std::vector<bool> interior(rho.values.size());
  const double floor = tol.get("density_floor");
  for (std::size_t g = 0; g < interior.size(); ++g) interior[g] = rho.values[g] > floor;
  r.density_error = density_distance(rho, rho_s, interior);
  if (r.density_error > tol.get("density"))
    throw GateFailed("density mismatch: L2 interior error " + format_double(r.density_error));

  const EnergyBreakdown psi = energy_breakdown(fb, full_state, tol);
  const EnergyBreakdown phi = energy_breakdown(ab, aux_state, tol);
  for (std::size_t a = 0; a < full.modes.size(); ++a)
    r.displacement_error = std::max(r.displacement_error, std::abs(psi.modes[a].p - phi.modes[a].p));
  if (r.displacement_error > tol.get("displacement"))
    throw GateFailed("mode displacement mismatch " + format_double(r.displacement_error));

  // -int r . grad(v_s - v) rho
  const ProductBasis& basis = fb.basis();
  const int d = basis.dims();
  std::vector<double> gv(d), gs(d);
  double rv = 0.0, rs = 0.0;
  for (std::size_t g = 0; g < basis.grid_size(); ++g) {
    const auto x = basis.position(g);
    potential_gradient(full.potential, x, g, gv);
    potential_gradient(aux.potential, x, g, gs);
    double a = 0.0, b = 0.0;
    for (int k = 0; k < d; ++k) {
      a += x[k] * gv[k];
      b += x[k] * gs[k];
    }
    rv += rho.values[g] * a;
    rs += rho.values[g] * b;
  }
  const double cell = basis.cell_volume();
  rv *= cell;
  rs *= cell;

  const double lhs1 = 2.0 * (psi.kinetic - phi.kinetic) + psi.interaction_virial - psi.coupling -
                      2.0 * psi.self_energy;
  const double rhs1 = rv - rs;
  const double scale1 = 2.0 * (std::abs(psi.kinetic) + std::abs(phi.kinetic)) +
                        std::abs(psi.interaction_virial) + std::abs(psi.coupling) +
                        2.0 * std::abs(psi.self_energy) + std::abs(rv) + std::abs(rs);
  r.electronic = make_entry("ks_electronic_identity", lhs1 - rhs1, scale1, tol.get("identity"));
  r.electronic.note = "interaction kernel: " + psi.interaction_kernel;

  double delta = 0.0, scale2 = 0.0, rhs2 = 0.0;
  for (std::size_t a = 0; a < full.modes.size(); ++a) {
    const auto& m = psi.modes[a];
    const auto& n = phi.modes[a];
    delta += (m.omega2_p_squared - m.q_squared) - (n.omega2_p_squared - n.q_squared);
    scale2 += std::abs(m.omega2_p_squared) + std::abs(m.q_squared) + std::abs(n.omega2_p_squared) +
              std::abs(n.q_squared);
    rhs2 += (aux.modes[a].drive - full.modes[a].drive) / full.modes[a].omega * m.p;
  }
  const double lhs2 = delta + psi.coupling;
  scale2 += std::abs(psi.coupling) + std::abs(rhs2);
  r.mode = make_entry("ks_mode_identity", lhs2 - rhs2, scale2, tol.get("identity"));

  r.direct_coupling = psi.coupling;
  r.recovered_coupling = rhs2 - delta;
  r.recovery = make_entry("ks_coupling_recovery", r.recovered_coupling - r.direct_coupling, scale2,
                          tol.get("recovery"));
  return r;
}

nlohmann::json to_json(const DensityProfile& rho) {
  return {{"grid", grid_json(rho.grid)}, {"density", rho.values}, {"integral", rho.integral()}};
}

nlohmann::json to_json(const AuxiliarySystem& aux) {
  std::vector<int> retained(aux.retained.begin(), aux.retained.end());
  return {{"grid", grid_json(aux.grid)},
          {"potential", aux.potential},
          {"retained", retained},
          {"forces", aux.forces},
          {"gauge", aux.gauge}};
}

nlohmann::json to_json(const KsIdentityReport& r) {
  return {{"density_error", r.density_error},
          {"displacement_error", r.displacement_error},
          {"identities", {to_json(r.electronic), to_json(r.mode), to_json(r.recovery)}},
          {"recovered_coupling", r.recovered_coupling},
          {"direct_coupling", r.direct_coupling},
          {"pass", r.all_pass()}};
}

DensityProfile read_density_csv(const std::filesystem::path& path, const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open density file " + path.string());
  const ProductBasis basis = grid_basis(grid);
  const int d = basis.dims();
  DensityProfile rho;
  rho.grid = grid;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cols.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (row == 0 && rho.values.empty()) continue;  // header
      throw ConfigError("density file: non-numeric row " + std::to_string(row + 1));
    }
    if (static_cast<int>(cols.size()) != d + 1)
      throw ConfigError("density file: expected " + std::to_string(d + 1) + " columns");
    if (row >= basis.grid_size()) throw ConfigError("density file has more rows than grid points");
    for (int k = 0; k < d; ++k)
      if (std::abs(cols[k] - basis.coordinate(row, k)) > 1e-6 * basis.spacing(k))
        throw ConfigError("density file: coordinates do not match the grid at row " +
                          std::to_string(row + 1));
    rho.values.push_back(cols[d]);
    ++row;
  }
  if (row != basis.grid_size()) throw ConfigError("density file has fewer rows than grid points");
  return rho;
}

void write_density_csv(const std::filesystem::path& path, const DensityProfile& rho) {
  const ProductBasis basis = grid_basis(rho.grid);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  static const char* names[] = {"x", "y", "z"};
  for (int k = 0; k < basis.dims(); ++k) out << names[k] << ',';
  out << "rho\n";
  for (std::size_t g = 0; g < rho.values.size(); ++g) {
    for (int k = 0; k < basis.dims(); ++k) out << format_double(basis.coordinate(g, k)) << ',';
    out << format_double(rho.values[g]) << '\n';
  }
}

}  // namespace pfv
