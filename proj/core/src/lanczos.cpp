#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "pfv/solver.hpp"

namespace pfv {

namespace {

struct Ritz {
  double value = 0.0;
  Eigen::VectorXd vector;
};

// Lowest eigenpair of the leading m x m block of the tridiagonal matrix.
Ritz lowest_ritz(const std::vector<double>& alpha, const std::vector<double>& beta, int m) {
  std::vector<double> d(alpha.begin(), alpha.begin() + m);
  std::vector<double> e(std::max(m - 1, 1), 0.0);
  std::copy(beta.begin(), beta.begin() + (m - 1), e.begin());
  Ritz r;
  r.vector.resize(m);
  std::vector<lapack_int> ifail(m);
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', m, d.data(), e.data(), 0.0, 0.0, 1, 1,
                     2.0 * LAPACKE_dlamch('S'), &found, &r.value, r.vector.data(), m, ifail.data());
  if (info != 0 || found != 1) throw Error("tridiagonal eigenvalue solver failed");
  return r;
}

void project_out(const std::vector<ComplexVector>& locked, ComplexVector& w) {
  for (const auto& u : locked) w -= inner_product(u, w) * u;
}

}  // namespace

std::vector<QuantumState> lanczos_lowest(const SparseOperator& h, const EigenSolveConfig& config) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(h.dimension());
  if (config.count > n) throw ConfigError("more eigenpairs requested than the dimension");
  const int m_max = static_cast<int>(std::min<Eigen::Index>(config.krylov_dimension, n));

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss;
  std::vector<ComplexVector> locked;
  std::vector<QuantumState> out;
  int matvecs = 0;
  double best = std::numeric_limits<double>::infinity();

  ComplexMatrix v(n, m_max + 1);
  ComplexVector w(n);
  std::vector<double> alpha(m_max + 1), beta(m_max + 1);

  for (int target = 0; target < config.count; ++target) {
    ComplexVector start(n);
    for (auto& c : start) c = Complex(gauss(rng), gauss(rng));
    bool done = false;
    best = std::numeric_limits<double>::infinity();

    while (!done) {
      project_out(locked, start);
      start /= norm(start);
      v.col(0) = start;
      int m = 0;
      ComplexVector candidate;
      for (int j = 0; j < m_max; ++j) {
        h.apply(std::span<const Complex>(v.col(j).data(), static_cast<std::size_t>(n)),
                std::span<Complex>(w.data(), static_cast<std::size_t>(n)));
        ++matvecs;
        alpha[j] = inner_product(ComplexVector(v.col(j)), w).real();
        for (int pass = 0; pass < 2; ++pass) {
          const ComplexVector coeffs = v.leftCols(j + 1).adjoint() * w;
          w.noalias() -= v.leftCols(j + 1) * coeffs;
          project_out(locked, w);
        }
        beta[j] = norm(w);
        m = j + 1;

        const bool breakdown = beta[j] <= 1e-14 * std::max(1.0, std::abs(alpha[j]));
        const bool check = breakdown || m == m_max || m % 10 == 0 || matvecs >= config.max_iterations;
        if (!breakdown) {
          v.col(j + 1) = w / beta[j];
          if (std::abs(inner_product(ComplexVector(v.col(0)), ComplexVector(v.col(j + 1)))) > 1e-8) {
            candidate.resize(0);
            break;
          }
        }
        if (!check) continue;
        const Ritz ritz = lowest_ritz(alpha, beta, m);
        const double estimate = beta[j] * std::abs(ritz.vector[m - 1]);
        if (estimate <= 0.5 * config.tolerance || breakdown || m == m_max ||
            matvecs >= config.max_iterations) {
          candidate = v.leftCols(m) * ritz.vector.cast<Complex>();
          break;
        }
      }
      if (candidate.size() == 0) {
        // Orthogonality lost: restart from the current Ritz vector.
        const Ritz ritz = lowest_ritz(alpha, beta, m);
        candidate = v.leftCols(m) * ritz.vector.cast<Complex>();
      }
      candidate /= norm(candidate);
      const double residual = eigenstate_residual(h, candidate);
      best = std::min(best, residual);
      if (residual <= config.tolerance) {
        done = true;
        fix_global_phase(candidate);
        QuantumState s;
        s.energy = expectation(h, candidate).real();
        s.eigenresidual = eigenstate_residual(h, candidate);
        s.coefficients = candidate;
        locked.push_back(candidate);
        out.push_back(std::move(s));
      } else if (matvecs >= config.max_iterations) {
        throw NotConverged("Lanczos did not converge within " +
                               std::to_string(config.max_iterations) + " matrix-vector products",
                           best);
      } else {
        start = candidate;
      }
    }
  }
  return out;
}

}  // namespace pfv
