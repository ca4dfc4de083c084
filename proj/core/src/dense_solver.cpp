#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Eigenvalues>

#include "pfv/solver.hpp"

namespace pfv {

namespace {

struct Entry {
  std::size_t row;
  std::size_t col;
  Complex value;
};

Complex phase_factor(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return {0.0, 1.0};
    case 2:
      return {-1.0, 0.0};
    default:
      return {0.0, -1.0};
  }
}

std::vector<Entry> column_entries(const SparseOperator& h, std::size_t j) {
  const std::size_t n = h.dimension();
  ComplexVector x = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  ComplexVector y(static_cast<Eigen::Index>(n));
  x[static_cast<Eigen::Index>(j)] = 1.0;
  h.apply(std::span<const Complex>(x.data(), n), std::span<Complex>(y.data(), n));
  std::vector<Entry> out;
  for (std::size_t i = 0; i < n; ++i)
    if (y[static_cast<Eigen::Index>(i)] != Complex{}) out.push_back({i, j, y[static_cast<Eigen::Index>(i)]});
  return out;
}

bool matches(const SparseOperator& h, const std::vector<Entry>& entries, std::uint64_t seed) {
  const std::size_t n = h.dimension();
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  ComplexVector x(static_cast<Eigen::Index>(n));
  for (auto& c : x) c = Complex(uniform(rng), uniform(rng));
  const ComplexVector hx = h.apply(x);
  ComplexVector bx = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& e : entries)
    bx[static_cast<Eigen::Index>(e.row)] += e.value * x[static_cast<Eigen::Index>(e.col)];
  return (hx - bx).norm() <= 1e-12 * std::max(hx.norm(), 1.0);
}

// Entries of H. Columns far enough apart are probed together; the band
// width is read off sample columns and the result checked on a random vector.
std::vector<Entry> probe_entries(const SparseOperator& h, std::uint64_t seed) {
  const std::size_t n = h.dimension();
  std::size_t kd = 0;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> samples = {0, n / 2, n - 1};
  for (int k = 0; k < 8; ++k) samples.push_back(rng() % n);
  for (std::size_t j : samples)
    for (const auto& e : column_entries(h, j))
      kd = std::max(kd, e.row > e.col ? e.row - e.col : e.col - e.row);

  const std::size_t period = 2 * kd + 1;
  std::vector<Entry> out;
  bool band_ok = period < n;
  if (band_ok) {
    ComplexVector x(static_cast<Eigen::Index>(n));
    ComplexVector y(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < period && band_ok; ++r) {
      x.setZero();
      for (std::size_t j = r; j < n; j += period) x[static_cast<Eigen::Index>(j)] = 1.0;
      h.apply(std::span<const Complex>(x.data(), n), std::span<Complex>(y.data(), n));
      for (std::size_t i = 0; i < n; ++i) {
        const Complex v = y[static_cast<Eigen::Index>(i)];
        if (v == Complex{}) continue;
        auto offset = static_cast<long long>((r + period - i % period) % period);
        if (offset > static_cast<long long>(kd)) offset -= static_cast<long long>(period);
        const long long j = static_cast<long long>(i) + offset;
        if (j < 0 || j >= static_cast<long long>(n)) {
          band_ok = false;
          break;
        }
        out.push_back({i, static_cast<std::size_t>(j), v});
      }
    }
    band_ok = band_ok && matches(h, out, seed);
  }
  if (!band_ok) {
    out.clear();
    for (std::size_t j = 0; j < n; ++j) {
      auto col = column_entries(h, j);
      out.insert(out.end(), col.begin(), col.end());
    }
  }
  return out;
}

// Entries of U^H H U with U = diag(i^phase).
std::vector<Entry> probe(const SparseOperator& h, const std::vector<int>& phases,
                         std::uint64_t seed) {
  auto entries = probe_entries(h, seed);
  if (!phases.empty())
    for (auto& e : entries) e.value *= phase_factor(phases[e.col] - phases[e.row]);
  return entries;
}

// Number of eigenvalues below sigma of a symmetric band matrix, from the
// inertia of an unpivoted LDL^T factorization of A - sigma I.
class BandInertia {
 public:
  BandInertia(const std::vector<Entry>& entries, std::size_t n, std::size_t kd)
      : n_(n), kd_(kd), diag_(n, 0.0), lower_(n * kd, 0.0), work_(n * kd, 0.0), d_(n, 0.0) {
    for (const auto& e : entries) {
      if (e.row == e.col)
        diag_[e.row] = e.value.real();
      else if (e.row > e.col)
        lower_[e.row * kd_ + (e.col + kd_ - e.row)] = e.value.real();
    }
  }

  std::size_t count_below(double sigma, double pivmin) {
    std::size_t negatives = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      const std::size_t first = j > kd_ ? j - kd_ : 0;
      double* lj = &work_[j * kd_];  // L(j, m) at lj[m + kd - j]
      double dj = diag_[j] - sigma;
      for (std::size_t k = first; k < j; ++k) {
        const double* lk = &work_[k * kd_];
        double s = lower_[j * kd_ + (k + kd_ - j)];
        const std::size_t m0 = std::max(first, k > kd_ ? k - kd_ : std::size_t{0});
        for (std::size_t m = m0; m < k; ++m) s -= lj[m + kd_ - j] * d_[m] * lk[m + kd_ - k];
        const double l = s / d_[k];
        lj[k + kd_ - j] = l;
        dj -= l * l * d_[k];
      }
      if (std::abs(dj) < pivmin) dj = -pivmin;
      d_[j] = dj;
      if (dj < 0.0) ++negatives;
    }
    return negatives;
  }

 private:
  std::size_t n_, kd_;
  std::vector<double> diag_, lower_, work_, d_;
};

std::vector<Eigen::VectorXd> banded_solve(const std::vector<Entry>& entries, std::size_t n,
                                          std::size_t kd, int count, double scale,
                                          std::uint64_t seed, std::vector<double>& values) {
  const auto N = static_cast<lapack_int>(n);
  const auto KD = static_cast<lapack_int>(kd);
  const lapack_int ldlu = 3 * KD + 1;
  std::vector<double> general(static_cast<std::size_t>(ldlu) * n, 0.0);
  std::vector<double> radius(n, 0.0), centre(n, 0.0);
  for (const auto& e : entries) {
    general[(2 * kd + e.row - e.col) + e.col * ldlu] = e.value.real();
    if (e.row == e.col)
      centre[e.row] = e.value.real();
    else
      radius[e.row] += std::abs(e.value.real());
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, centre[i] - radius[i]);
    hi = std::max(hi, centre[i] + radius[i]);
  }
  const double width = std::max({std::abs(lo), std::abs(hi), 1.0});
  const double pivmin = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon() * width;
  const double resolution = 4.0 * std::numeric_limits<double>::epsilon() * width;

  BandInertia inertia(entries, n, kd);
  values.clear();
  double floor_lo = lo;
  for (int k = 1; k <= count; ++k) {
    double a = floor_lo, b = hi;
    while (b - a > resolution) {
      const double mid = 0.5 * (a + b);
      if (inertia.count_below(mid, pivmin) >= static_cast<std::size_t>(k))
        b = mid;
      else
        a = mid;
    }
    values.push_back(0.5 * (a + b));
    floor_lo = a;
  }
  lapack_int info = 0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<Eigen::VectorXd> vectors;
  std::vector<lapack_int> pivots(n);
  std::vector<double> lu(general.size());
  for (int k = 0; k < count; ++k) {
    const double lambda = values[k];
    double delta = 1e-13 * std::max(1.0, scale);
    for (int attempt = 0;; ++attempt) {
      lu = general;
      for (std::size_t i = 0; i < n; ++i) lu[2 * kd + i * ldlu] -= lambda - delta;
      info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, N, N, KD, KD, lu.data(), ldlu, pivots.data());
      if (info == 0) break;
      if (info < 0 || attempt > 20) throw Error("band factorization failed");
      delta *= 10.0;
    }
    std::vector<int> cluster;
    for (int j = 0; j < k; ++j)
      if (std::abs(values[j] - lambda) <= 1e-7 * std::max(1.0, scale)) cluster.push_back(j);

    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (auto& v : x) v = uniform(rng);
    x.normalize();
    for (int it = 0; it < 3; ++it) {
      info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', N, KD, KD, 1, lu.data(), ldlu, pivots.data(),
                            x.data(), N);
      if (info != 0) throw Error("band triangular solve failed");
      for (int j : cluster) x -= vectors[j].dot(x) * vectors[j];
      x.normalize();
    }
    vectors.push_back(std::move(x));
  }
  return vectors;
}

std::vector<Eigen::VectorXd> full_real_solve(const std::vector<Entry>& entries, std::size_t n,
                                             int count, std::vector<double>& values) {
  const auto N = static_cast<lapack_int>(n);
  std::vector<double> a(n * n, 0.0);
  for (const auto& e : entries) a[e.row + e.col * n] = e.value.real();
  std::vector<double> w(n);
  std::vector<double> z(n * static_cast<std::size_t>(count));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', N, a.data(), N, 0.0, 0.0, 1, count,
                     2.0 * LAPACKE_dlamch('S'), &found, w.data(), z.data(), N, support.data());
  if (info != 0 || found != count) throw Error("dense eigenvalue solver failed");
  values.assign(w.begin(), w.begin() + count);
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < count; ++k)
    out.emplace_back(Eigen::Map<Eigen::VectorXd>(z.data() + k * n, static_cast<Eigen::Index>(n)));
  return out;
}

}  // namespace

void EigenSolveConfig::validate() const {
  if (count < 1) throw ConfigError("eigenpair count must be at least 1");
  if (!(tolerance > 0.0)) throw ConfigError("eigensolver tolerance must be positive");
  if (krylov_dimension < 2 * count + 8)
    throw ConfigError("Krylov dimension must be at least 2k+8");
  if (max_iterations < 1) throw ConfigError("max iterations must be positive");
}

std::vector<int> fock_phases(const ProductBasis& basis) {
  std::vector<int> out(basis.dimension());
  const std::size_t M = basis.mode_dimension();
  std::vector<int> per_fock(M, 0);
  for (std::size_t m = 0; m < M; ++m) {
    int s = 0;
    for (std::size_t a = 0; a < basis.mode_count(); ++a) s += basis.occupation(m, a);
    per_fock[m] = s % 4;
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = per_fock[j % M];
  return out;
}

void fix_global_phase(ComplexVector& psi) {
  if (psi.size() == 0) return;
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi[i]);
    if (a > mag * (1.0 + 1e-12)) {
      mag = a;
      best = i;
    }
  }
  if (mag > 0.0) psi *= std::conj(psi[best]) / mag;
}

double eigenstate_residual(const SparseOperator& h, const ComplexVector& psi) {
  const ComplexVector hpsi = h.apply(psi);
  const double e = inner_product(psi, hpsi).real() / inner_product(psi, psi).real();
  return norm(ComplexVector(hpsi - e * psi));
}

double spectral_scale(const SparseOperator& h, double e0) {
  double s = std::abs(e0);
  if (h.has_diagonal()) s = std::max(s, h.diagonal().cwiseAbs().maxCoeff());
  return s;
}

std::vector<QuantumState> dense_eigensolve(const SparseOperator& h, const EigenSolveConfig& config,
                                           const std::vector<int>& phases) {
  config.validate();
  const std::size_t n = h.dimension();
  if (n > config.dense_cap)
    throw CapExceeded("dimension " + std::to_string(n) + " exceeds dense cap " +
                      std::to_string(config.dense_cap) + "; use the iterative path");
  if (static_cast<std::size_t>(config.count) > n)
    throw ConfigError("more eigenpairs requested than the dimension");
  if (!phases.empty() && phases.size() != n) throw DimensionMismatch("phase table size");

  const auto entries = probe(h, phases, config.seed);
  double biggest = 0.0, imaginary = 0.0;
  std::size_t kd = 0;
  for (const auto& e : entries) {
    biggest = std::max(biggest, std::abs(e.value));
    imaginary = std::max(imaginary, std::abs(e.value.imag()));
    kd = std::max(kd, e.row > e.col ? e.row - e.col : e.col - e.row);
  }

  std::vector<ComplexVector> vectors;
  if (imaginary <= 1e-14 * biggest) {
    std::vector<double> values;
    std::vector<Eigen::VectorXd> real;
    if (kd * 5 < n)
      real = banded_solve(entries, n, std::max<std::size_t>(kd, 1), config.count, biggest,
                          config.seed, values);
    else
      real = full_real_solve(entries, n, config.count, values);
    for (auto& x : real) {
      ComplexVector psi(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        psi[i] = x[i] * (phases.empty() ? Complex{1.0, 0.0} : phase_factor(phases[i]));
      vectors.push_back(std::move(psi));
    }
  } else {
    ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& e : entries)
      a(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
    if (solver.info() != Eigen::Success) throw Error("dense eigenvalue solver failed");
    for (int k = 0; k < config.count; ++k) {
      ComplexVector psi = solver.eigenvectors().col(k);
      if (!phases.empty())
        for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] *= phase_factor(phases[i]);
      vectors.push_back(std::move(psi));
    }
  }

  std::vector<QuantumState> out;
  for (auto& psi : vectors) {
    psi /= norm(psi);
    fix_global_phase(psi);
    QuantumState s;
    s.energy = expectation(h, psi).real();
    s.eigenresidual = eigenstate_residual(h, psi);
    s.coefficients = std::move(psi);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

SparseOperator quantum_total(const OperatorBuilder& builder) {
  if (builder.spec().field_treatment == FieldTreatment::classical)
    throw Error("classical field treatment needs the mean-field solver");
  return builder.term(TermId::Total);
}

}  // namespace

std::vector<QuantumState> dense_eigensolve(const SystemSpec& spec, const EigenSolveConfig& config) {
  hilbert_dimension(spec);
  const OperatorBuilder builder(spec);
  return dense_eigensolve(quantum_total(builder), config, fock_phases(builder.basis()));
}

QuantumState lanczos_ground_state(const SystemSpec& spec, const EigenSolveConfig& config) {
  hilbert_dimension(spec);
  const OperatorBuilder builder(spec);
  EigenSolveConfig one = config;
  one.count = 1;
  return lanczos_lowest(quantum_total(builder), one).front();
}

QuantumState ground_state(const SparseOperator& h, const EigenSolveConfig& config,
                          const std::vector<int>& phases) {
  EigenSolveConfig one = config;
  one.count = 1;
  if (h.dimension() <= config.dense_cap) return dense_eigensolve(h, one, phases).front();
  return lanczos_lowest(h, one).front();
}

QuantumState ground_state(const SystemSpec& spec, const EigenSolveConfig& config) {
  hilbert_dimension(spec);
  const OperatorBuilder builder(spec);
  return ground_state(quantum_total(builder), config, fock_phases(builder.basis()));
}

double eigenstate_residual(const SystemSpec& spec, const ComplexVector& psi) {
  const OperatorBuilder builder(spec);
  return eigenstate_residual(quantum_total(builder), psi);
}

}  // namespace pfv
