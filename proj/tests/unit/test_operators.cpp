#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "pfv/operators.hpp"
#include "pfv/parallel.hpp"

using namespace pfv;
using namespace pfv::testing;

namespace {

constexpr Complex kI{0.0, 1.0};

double max_abs(const Dense& m) { return m.cwiseAbs().maxCoeff(); }

SystemSpec small_coupled() { return coupled_oscillator(21, 4.0, 0.3, 4, 0.2, 1.3); }

SystemSpec pair_spec(int points, Exchange x) {
  SystemSpec s;
  s.electrons = {2, 1, x};
  s.grid = {{-4}, {4}, {points}};
  s.potential = potential::SoftCoulombWell{2.0, 1.0};
  s.interaction = interaction::SoftCoulomb{1.0};
  return s;
}

// Electron-only ground state tensored with the mode vacuum.
ComplexVector product_ground(const SystemSpec& s) {
  SystemSpec e = s;
  e.modes.clear();
  const Dense h = to_dense(build_term(e, TermId::Total));
  Eigen::SelfAdjointEigenSolver<Dense> es(h);
  Dense vac = Dense::Zero(s.modes[0].n_max + 1, 1);
  vac(0, 0) = 1.0;
  return kron(Dense(es.eigenvectors().col(0)), vac).col(0);
}

}  // namespace

TEST_CASE("ladder matrices") {
  SUBCASE("matrix element") {
    const LadderMatrices l = mode_ladder_matrices(ModeSpec{2.0, {0.0}, 0.0, 5});
    CHECK(l.q(0, 1).real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(l.q.rows() == 6);
    CHECK(max_abs(l.q - q_ladder(5, 2.0)) < 1e-15);
    CHECK(max_abs(l.p - p_ladder(5, 2.0)) < 1e-15);
    CHECK(max_abs(l.q.imag()) == 0.0);
    CHECK(max_abs(l.p.real()) == 0.0);
  }
  SUBCASE("commutator is i except at the cutoff") {
    const int n = 12;
    const LadderMatrices l = mode_ladder_matrices(ModeSpec{1.0, {0.0}, 0.0, n});
    const Dense c = l.q * l.p - l.p * l.q;
    Dense expect = kI * Dense::Identity(n + 1, n + 1);
    CHECK(std::abs(c(n, n) - expect(n, n)) > 0.5);
    expect(n, n) = c(n, n);
    CHECK(max_abs(c - expect) < 1e-13);
  }
  SUBCASE("squares come from one extra level") {
    const int n = 7;
    const double w = 1.7;
    const LadderMatrices l = mode_ladder_matrices(ModeSpec{w, {0.0}, 0.0, n});
    const Dense q = q_ladder(n + 1, w), p = p_ladder(n + 1, w);
    CHECK(max_abs(l.q_squared - (q * q).topLeftCorner(n + 1, n + 1)) < 1e-13);
    CHECK(max_abs(l.p_squared - (p * p).topLeftCorner(n + 1, n + 1)) < 1e-13);
  }
  SUBCASE("oscillator spectrum") {
    const LadderMatrices l = mode_ladder_matrices(ModeSpec{1.0, {0.0}, 0.0, 40});
    const Dense hb = 0.5 * (l.p_squared + l.q_squared);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Dense>(hb).eigenvalues();
    CHECK(std::abs(ev[0] - 0.5) < 1e-12);
    CHECK(std::abs(ev[1] - 1.5) < 1e-12);
    CHECK(std::abs(ev[2] - 2.5) < 1e-12);
  }
  CHECK_THROWS_AS(mode_ladder_matrices(ModeSpec{1.0, {0.0}, 0.0, 0}), ConfigError);
}

TEST_CASE("terms match the Kronecker-product Hamiltonian") {
  const SystemSpec s = small_coupled();
  const KronPieces k = kron_hamiltonian(s);
  const double scale = max_abs(k.total());
  CHECK(max_abs(to_dense(build_term(s, TermId::Kinetic)) - k.kinetic) < 1e-13 * scale);
  CHECK(max_abs(to_dense(build_term(s, TermId::ExternalPotential)) - k.potential) < 1e-13 * scale);
  CHECK(max_abs(to_dense(build_term(s, TermId::Interaction))) == 0.0);
  CHECK(max_abs(to_dense(build_term(s, TermId::FieldEnergy)) - k.field) < 1e-13 * scale);
  CHECK(max_abs(to_dense(build_term(s, TermId::DipoleCoupling)) - k.coupling) < 1e-13 * scale);
  CHECK(max_abs(to_dense(build_term(s, TermId::DipoleSelfEnergy)) - k.self_energy) < 1e-13 * scale);
  CHECK(max_abs(to_dense(build_term(s, TermId::ExternalDrive)) - k.drive) < 1e-13 * scale);
  CHECK(max_abs(to_dense(build_term(s, TermId::Total)) - k.total()) < 1e-13 * scale);
}

TEST_CASE("two modes: tensor layout matches the Kronecker ordering") {
  SystemSpec s = small_coupled();
  s.modes.push_back(ModeSpec{0.7, {-0.2}, 0.1, 2});
  const KronPieces k = kron_hamiltonian(s);
  CHECK(max_abs(to_dense(build_term(s, TermId::Total)) - k.total()) < 1e-12 * max_abs(k.total()));
}

TEST_CASE("zero coupling gives zero coupling terms") {
  const SystemSpec s = coupled_oscillator(15, 3.0, 0.0, 3);
  CHECK(max_abs(to_dense(build_term(s, TermId::DipoleCoupling))) == 0.0);
  CHECK(max_abs(to_dense(build_term(s, TermId::DipoleSelfEnergy))) == 0.0);
}

TEST_CASE("Total equals the sum of its terms in expectation") {
  for (const SystemSpec& s : {small_coupled(), pair_spec(12, Exchange::symmetric)}) {
    const OperatorBuilder b(s);
    const SparseOperator h = b.term(TermId::Total);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const ComplexVector psi = random_state(b.dimension(), seed);
      Complex sum = 0.0;
      double scale = 0.0;
      for (TermId id : kHamiltonianTerms) {
        const Complex e = expectation(b.term(id), psi);
        sum += e;
        scale += std::abs(e);
      }
      CHECK(std::abs(sum - expectation(h, psi)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("transformed Hamiltonian equals Total") {
  SystemSpec s = small_coupled();
  s.modes.push_back(ModeSpec{0.7, {-0.2}, 0.1, 3});
  const OperatorBuilder b(s);
  const SparseOperator h = b.term(TermId::Total);
  const SparseOperator t = b.term(TermId::TotalTransformed);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ComplexVector psi = random_state(b.dimension(), seed);
    const Complex a = expectation(h, psi), c = expectation(t, psi);
    CHECK(std::abs(a - c) <= 1e-10 * std::abs(a));
  }
}

TEST_CASE("Hamiltonian terms are Hermitian") {
  SystemSpec coupled = small_coupled();
  SystemSpec pair = pair_spec(10, Exchange::antisymmetric);
  pair.modes = {ModeSpec{1.0, {0.2}, 0.3, 2}};
  for (const SystemSpec& s : {coupled, pair}) {
    const OperatorBuilder b(s);
    const TermId ids[] = {TermId::Kinetic,          TermId::ExternalPotential, TermId::Interaction,
                          TermId::FieldEnergy,      TermId::DipoleCoupling,    TermId::DipoleSelfEnergy,
                          TermId::ExternalDrive,    TermId::Total,             TermId::TotalTransformed};
    for (TermId id : ids) {
      const SparseOperator op = b.term(id);
      CHECK(op.hermitian());
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        const ComplexVector u = random_state(b.dimension(), 1000 + 2 * k);
        const ComplexVector v = random_state(b.dimension(), 1001 + 2 * k);
        const Complex uv = inner_product(u, op.apply(v));
        const Complex vu = inner_product(v, op.apply(u));
        const double mag = std::max({std::abs(uv), norm(op.apply(u)), 1e-300});
        worst = std::max(worst, std::abs(uv - std::conj(vu)) / mag);
      }
      INFO(term_name(id));
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("positivity of the quadratic terms on random states") {
  SystemSpec pair = pair_spec(10, Exchange::symmetric);
  pair.modes = {ModeSpec{1.0, {0.4}, 0.0, 3}};
  for (const SystemSpec& s : {small_coupled(), pair}) {
    const OperatorBuilder b(s);
    const SparseOperator hb = b.term(TermId::FieldEnergy), hc = b.term(TermId::DipoleCoupling),
                         hd = b.term(TermId::DipoleSelfEnergy);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const ComplexVector psi = random_state(b.dimension(), seed);
      double scale = 0.0;
      for (TermId id : kHamiltonianTerms) scale += std::abs(expectation(b.term(id), psi));
      CHECK(expectation(b.term(TermId::Kinetic), psi).real() >= -1e-12 * scale);
      CHECK(expectation(b.term(TermId::Interaction), psi).real() >= -1e-12 * scale);
      CHECK(expectation(hd, psi).real() >= -1e-12 * scale);
      CHECK(expectation(hb, psi).real() >= -1e-12 * scale);
      const double sum = (expectation(hb, psi) + expectation(hc, psi) + expectation(hd, psi)).real();
      CHECK(sum >= -1e-10 * scale);
    }
  }
}

TEST_CASE("electron-only and mode-only terms commute") {
  const SystemSpec s = small_coupled();
  const Dense t = to_dense(build_term(s, TermId::Kinetic));
  const Dense v = to_dense(build_term(s, TermId::ExternalPotential));
  const Dense hb = to_dense(build_term(s, TermId::FieldEnergy));
  const Dense hx = to_dense(build_term(s, TermId::ExternalDrive));
  CHECK(max_abs(t * hb - hb * t) == 0.0);
  CHECK(max_abs(v * hx - hx * v) == 0.0);
}

TEST_CASE("two-electron sectors reproduce the projected product-space spectrum") {
  const int n = 14;
  for (Exchange x : {Exchange::symmetric, Exchange::antisymmetric}) {
    const SystemSpec s = pair_spec(n, x);
    const Dense h = to_dense(build_term(s, TermId::Total));

    // Independent two-particle Hamiltonian on ordered pairs.
    const double dx = 8.0 / (n - 1);
    const auto xs = grid_points(s.grid);
    Dense one = -0.5 * laplacian_1d(n, dx);
    for (int i = 0; i < n; ++i) one(i, i) += -2.0 / std::sqrt(xs[i] * xs[i] + 1.0);
    const Dense id = Dense::Identity(n, n);
    Dense full = kron(one, id) + kron(id, one);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        full(a * n + c, a * n + c) += 1.0 / std::sqrt((xs[a] - xs[c]) * (xs[a] - xs[c]) + 1.0);

    const double sign = x == Exchange::symmetric ? 1.0 : -1.0;
    std::vector<Eigen::VectorXcd> cols;
    for (int a = 0; a < n; ++a)
      for (int c = a; c < n; ++c) {
        if (a == c && sign < 0) continue;
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n * n);
        e[a * n + c] += 1.0;
        e[c * n + a] += sign;
        cols.push_back(e.normalized());
      }
    Dense basis(n * n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = cols[k];
    const Dense projected = basis.adjoint() * full * basis;
    REQUIRE(projected.rows() == h.rows());
    const Eigen::VectorXd e1 = Eigen::SelfAdjointEigenSolver<Dense>(h).eigenvalues();
    const Eigen::VectorXd e2 = Eigen::SelfAdjointEigenSolver<Dense>(projected).eigenvalues();
    CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-11 * e2.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("expectation values of simple states") {
  const SystemSpec s = coupled_oscillator(31, 5.0, 0.0, 6);
  const OperatorBuilder b(s);
  const ComplexVector psi = random_state(b.dimension(), 7);
  CHECK(expectation(SparseOperator::identity(b.dimension()), psi).real() ==
        doctest::Approx(1.0).epsilon(1e-14));

  const ComplexVector g = product_ground(s);
  CHECK(expectation(b.term(TermId::FieldEnergy), g).real() == doctest::Approx(0.5).epsilon(1e-13));
  const LadderMatrices l = mode_ladder_matrices(s.modes[0]);
  CHECK(expectation(b.mode_matrix(0, l.q_squared, true), g).real() ==
        doctest::Approx(0.5).epsilon(1e-13));

  CHECK_THROWS_AS(expectation(b.term(TermId::Kinetic), ComplexVector(ComplexVector::Zero(3))),
                  DimensionMismatch);
}

TEST_CASE("virial operators") {
  SUBCASE("electronic: x times the central derivative") {
    const SystemSpec s = coupled_oscillator(17, 3.0, 0.2, 3);
    const Dense a = to_dense(build_virial_operator(s, VirialKind::electronic));
    const auto xs = grid_points(s.grid);
    Dense x = Dense::Zero(17, 17);
    for (int i = 0; i < 17; ++i) x(i, i) = xs[i];
    const Dense expect = kron(x * gradient_1d(17, 6.0 / 16), Dense::Identity(4, 4));
    CHECK(max_abs(a - expect) < 1e-13 * max_abs(expect));
  }
  SUBCASE("mode: q p") {
    const SystemSpec s = coupled_oscillator(9, 3.0, 0.2, 5, 0.0, 1.4);
    const Dense a = to_dense(build_virial_operator(s, VirialKind::mode));
    const Dense expect = kron(Dense::Identity(9, 9), q_ladder(5, 1.4) * p_ladder(5, 1.4));
    CHECK(max_abs(a - expect) < 1e-14);
  }
  SUBCASE("mixed: dipole times q; zero without coupling") {
    const SystemSpec s = coupled_oscillator(9, 3.0, 0.25, 3);
    const Dense a = to_dense(build_virial_operator(s, VirialKind::mixed, 0));
    const auto xs = grid_points(s.grid);
    Dense d = Dense::Zero(9, 9);
    for (int i = 0; i < 9; ++i) d(i, i) = 0.25 * xs[i];
    CHECK(max_abs(a - kron(d, q_ladder(3, 1.0))) < 1e-14);
    const SystemSpec z = coupled_oscillator(9, 3.0, 0.0, 3);
    CHECK(max_abs(to_dense(build_virial_operator(z, VirialKind::mixed, 0))) == 0.0);
    CHECK_THROWS(build_virial_operator(s, VirialKind::mixed, 3));
  }
}

TEST_CASE("commutator expectation") {
  SUBCASE("field energy with the mode virial on the vacuum") {
    const SystemSpec s = coupled_oscillator(15, 3.0, 0.0, 10);
    const OperatorBuilder b(s);
    const ComplexVector g = product_ground(s);
    const Complex c = commutator_expectation(b.term(TermId::FieldEnergy), b.virial(VirialKind::mode), g);
    CHECK(std::abs(c) < 1e-10);
  }
  SUBCASE("[H_b, q p] = i(q^2 - w^2 p^2) away from the cutoff") {
    const int n = 10;
    const double w = 1.3;
    const LadderMatrices l = mode_ladder_matrices(ModeSpec{w, {0.0}, 0.0, n});
    Dense hb = Dense::Zero(n + 1, n + 1);
    for (int k = 0; k <= n; ++k) hb(k, k) = w * (k + 0.5);
    const Dense qp = l.q * l.p;
    const Dense lhs = hb * qp - qp * hb;
    const Dense rhs = kI * (l.q_squared - w * w * l.p_squared);
    CHECK(max_abs((lhs - rhs).topLeftCorner(n, n)) < 1e-13);
  }
  SUBCASE("mixed operator without coupling") {
    const SystemSpec s = coupled_oscillator(15, 3.0, 0.0, 4);
    const OperatorBuilder b(s);
    const ComplexVector psi = random_state(b.dimension(), 3);
    CHECK(std::abs(commutator_expectation(b.term(TermId::Total), b.virial(VirialKind::mixed, 0), psi)) <
          1e-12);
  }
  SUBCASE("eigenvector bound") {
    const SystemSpec s = small_coupled();
    const OperatorBuilder b(s);
    const Dense h = to_dense(b.term(TermId::Total));
    Eigen::SelfAdjointEigenSolver<Dense> es(h);
    const ComplexVector psi = es.eigenvectors().col(0);
    const SparseOperator hop = b.term(TermId::Total);
    const double eps = norm(hop.apply(psi) - es.eigenvalues()[0] * psi);
    for (VirialKind k : {VirialKind::electronic, VirialKind::mode, VirialKind::mixed}) {
      const SparseOperator a = b.virial(k, k == VirialKind::mixed ? 0 : -1);
      const double bound = std::max(2.0 * eps * norm(a.apply(psi)), 1e-13 * max_abs(h));
      CHECK(std::abs(commutator_expectation(hop, a, psi)) <= 10.0 * bound);
    }
  }
}

TEST_CASE("sparse operator algebra") {
  const SystemSpec s = small_coupled();
  const OperatorBuilder b(s);
  const SparseOperator t = b.term(TermId::Kinetic), c = b.term(TermId::DipoleCoupling);
  const Dense dt = to_dense(t), dc = to_dense(c);
  CHECK(max_abs(to_dense(t + c) - (dt + dc)) < 1e-12 * max_abs(dt));
  CHECK(max_abs(to_dense(t.scaled(Complex(0.5, -2.0))) - Complex(0.5, -2.0) * dt) < 1e-12 * max_abs(dt));
  CHECK(max_abs(to_dense(compose(t, c)) - dt * dc) < 1e-12 * max_abs(dt * dc));

  const ComplexVector u = random_state(b.dimension(), 11), v = random_state(b.dimension(), 12);
  const Complex a(0.3, -1.1);
  CHECK(norm(t.apply(u + a * v) - (t.apply(u) + a * t.apply(v))) < 1e-12 * max_abs(dt));

  std::vector<Triplet> trip{{0, 0, 2.0}, {0, 1, Complex(0, 1)}, {1, 0, Complex(0, -1)}, {2, 2, -1.0}};
  const SparseOperator m = SparseOperator::from_triplets(3, trip, true);
  Dense expect = Dense::Zero(3, 3);
  for (const auto& e : trip) expect(e.row, e.col) += e.value;
  CHECK(max_abs(to_dense(m) - expect) == 0.0);
  CHECK(max_abs(Dense(m.diagonal().asDiagonal()) - Dense(expect.diagonal().asDiagonal())) == 0.0);
}

TEST_CASE("classical field treatment needs mean-field parameters") {
  SystemSpec s = coupled_oscillator(15, 3.0, 0.1, 2);
  s.field_treatment = FieldTreatment::classical;
  const OperatorBuilder b(s);
  CHECK_THROWS(b.term(TermId::DipoleCoupling));
  CHECK_THROWS(b.term(TermId::TotalTransformed));
  const MeanFieldParams mf{{0.1}, {0.05}};
  CHECK_NOTHROW(b.term(TermId::DipoleCoupling, &mf));
}

TEST_CASE("results do not depend on the thread count") {
  const SystemSpec s = coupled_oscillator(301, 6.0, 0.1, 20);
  const OperatorBuilder b(s);
  const SparseOperator h = b.term(TermId::Total);
  const ComplexVector psi = random_state(b.dimension(), 5);
  set_thread_count(1);
  const ComplexVector y1 = h.apply(psi);
  const Complex e1 = inner_product(psi, y1);
  set_thread_count(4);
  const ComplexVector y4 = h.apply(psi);
  const Complex e4 = inner_product(psi, y4);
  set_thread_count(1);
  CHECK((y1 - y4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(e1 == e4);
}
