#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qfuel/engine2q.hpp"
#include "qfuel/errors.hpp"
#include "qfuel/hilbert.hpp"

using namespace qfuel;
using namespace qfuel::hilbert;

namespace {

const Dims kTwoQubits{2, 2};

StateVector random_state(const Dims& dims, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    Vector v(static_cast<Eigen::Index>(total_dimension(dims)));
    for (auto& a : v) a = Complex(normal(gen), normal(gen));
    return StateVector::normalized(dims, v);
}

Operator random_hermitian(const Dims& dims, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    const auto n = static_cast<Eigen::Index>(total_dimension(dims));
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(normal(gen), normal(gen));
    return Operator(dims, (m + m.adjoint()) / 2.0);
}

// Classic fourth-order Runge-Kutta on d psi/dt = -i H psi; independent of the
// eigendecomposition propagator.
Vector rk4(const Matrix& h, Vector psi, double t, double dt) {
    const Complex minus_i(0.0, -1.0);
    auto f = [&](const Vector& y) -> Vector { return minus_i * (h * y); };
    const auto steps = static_cast<long>(std::ceil(t / dt));
    const double step = t / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
        const Vector k1 = f(psi);
        const Vector k2 = f(psi + 0.5 * step * k1);
        const Vector k3 = f(psi + 0.5 * step * k2);
        const Vector k4 = f(psi + step * k3);
        psi += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return psi;
}

}  // namespace

TEST_CASE("tensor products follow left-major basis ordering") {
    const Operator i2 = Operator::identity({2});
    const Operator i4 = tensor(i2, i2);
    CHECK(i4.dims() == kTwoQubits);
    CHECK((i4.mat() - Matrix::Identity(4, 4)).norm() == doctest::Approx(0.0));

    const StateVector one_zero = tensor(StateVector::basis({2}, 1), StateVector::basis({2}, 0));
    CHECK(one_zero.probability(2) == doctest::Approx(1.0));
    CHECK(one_zero.dims() == kTwoQubits);

    // (sigma^dag sigma) (x) sigma_x, hand-multiplied: ones at (2,3) and (3,2).
    const Operator nx = tensor(Operator({2}, number()), Operator({2}, pauli_x()));
    Matrix expected = Matrix::Zero(4, 4);
    expected(2, 3) = 1.0;
    expected(3, 2) = 1.0;
    CHECK((nx.mat() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tensor of mixed kinds is rejected") {
    const HilbertObject state = StateVector::basis({2}, 0);
    const HilbertObject op = Operator::identity({2});
    CHECK_THROWS_AS(tensor(state, op), KindMismatchError);
    CHECK(std::holds_alternative<Operator>(tensor(op, op)));
}

TEST_CASE("embed places a local operator on its site") {
    const Operator n_b = embed(number(), 1, kTwoQubits);
    CHECK(n_b.mat()(1, 1) == Complex(1.0));
    CHECK(n_b.mat()(3, 3) == Complex(1.0));
    CHECK(n_b.mat()(2, 2) == Complex(0.0));
    CHECK_THROWS_AS(embed(number(), 2, kTwoQubits), ArgumentError);
}

TEST_CASE("state vector invariants") {
    CHECK_THROWS_AS(StateVector(kTwoQubits, Vector::Zero(3)), DimensionError);
    CHECK_THROWS_AS(StateVector(kTwoQubits, Vector::Ones(4)), NormError);
    CHECK_THROWS_AS(StateVector({1, 2}, Vector::Ones(2)), DimensionError);
    CHECK_THROWS_AS(StateVector::basis({2, 2, 2, 2, 2, 2, 2}, 0), DimensionError);
    const StateVector s = StateVector::basis_levels(kTwoQubits, {1, 0});
    CHECK(s.probability(2) == 1.0);
}

TEST_CASE("evolve_exact: null generator leaves the state unchanged") {
    std::mt19937_64 gen(1);
    const StateVector psi = random_state(kTwoQubits, gen);
    const StateVector out = evolve_exact(Operator::zero(kTwoQubits), psi, 3.7);
    CHECK((out.amps() - psi.amps()).norm() < 1e-15);
}

TEST_CASE("evolve_exact: Rabi transfer at t0 for delta = g") {
    const engine2q::EngineParams p(5.0, 1.0, 1.0);
    const StateVector psi = evolve_exact(engine2q::build_hamiltonian(p, true), engine2q::ket10(), p.t0());
    CHECK(psi.probability(2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(psi.probability(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("evolve_exact agrees with an RK4 oracle") {
    for (auto [delta, g] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}, std::pair{0.3, 1.7}}) {
        const engine2q::EngineParams p(1.0, delta, g);
        const Operator h = engine2q::build_hamiltonian(p, true);
        const double t = 1.3 * p.t0();
        const StateVector exact = evolve_exact(h, engine2q::ket10(), t);
        const Vector oracle = rk4(h.mat(), engine2q::ket10().amps(), t, 1e-4 / p.rabi_frequency());
        CHECK((exact.amps() - oracle).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("evolve_exact rejects bad input") {
    const Matrix m = (Matrix(2, 2) << 0.0, 1.0, 0.0, 0.0).finished();
    CHECK_THROWS_AS(evolve_exact(Operator({2}, m), StateVector::basis({2}, 0), 1.0), ContractViolation);
    CHECK_THROWS_AS(evolve_exact(Operator::zero({2}), StateVector::basis(kTwoQubits, 0), 1.0), DimensionError);
    CHECK_THROWS_AS(evolve_exact(Operator::zero({2}), StateVector::basis({2}, 0), -1.0), ArgumentError);
}

TEST_CASE("propagation properties on random generators") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> time(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Dims dims = trial % 2 ? Dims{2, 2, 2} : Dims{2, 3};
        const Operator h = random_hermitian(dims, gen);
        const StateVector psi = random_state(dims, gen);
        const double t1 = time(gen), t2 = time(gen);
        const Propagator prop(h);

        const StateVector direct = prop.evolve(psi, t1 + t2);
        CHECK(std::abs(direct.norm() - 1.0) < 1e-10);
        CHECK(std::abs(expval(direct, h) - expval(psi, h)) < 1e-9);

        const StateVector composed = prop.evolve(prop.evolve(psi, t1), t2);
        CHECK((composed.amps() - direct.amps()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("expval") {
    const engine2q::EngineParams p(5.0, 1.0, 1.0);
    const auto ops = engine2q::build_operators(p);
    CHECK(expval(engine2q::ket10(), ops.h_loc) == doctest::Approx(5.0));

    const double e_int = expval(engine2q::analytic_state(p, p.t0()), ops.v);
    CHECK(e_int == doctest::Approx(-p.delta() * std::pow(std::sin(p.theta()), 2)).epsilon(1e-12));

    std::mt19937_64 gen(3);
    CHECK(expval(random_state({2, 2, 2}, gen), Operator::identity({2, 2, 2})) == doctest::Approx(1.0));

    // A non-Hermitian observable with a complex expectation is rejected.
    const Operator raise = embed(raising(), 0, {2});
    const StateVector plus = StateVector::normalized({2}, (Vector(2) << 1.0, Complex(0.0, 1.0)).finished());
    CHECK_THROWS_AS(expval(plus, raise), HermiticityError);
}

TEST_CASE("partial trace") {
    std::mt19937_64 gen(11);
    const StateVector a = random_state({2}, gen);
    const StateVector b = random_state({3}, gen);
    const DensityMatrix rho_a = DensityMatrix::pure(a);
    const DensityMatrix product = DensityMatrix::pure(tensor(a, b));
    CHECK((partial_trace(product, {0}).mat() - rho_a.mat()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((partial_trace(product, {1}).mat() - DensityMatrix::pure(b).mat()).cwiseAbs().maxCoeff() < 1e-12);

    Vector bell = Vector::Zero(4);
    bell(1) = bell(2) = 1.0 / std::sqrt(2.0);
    const DensityMatrix rho_bell = DensityMatrix::pure(StateVector(kTwoQubits, bell));
    for (int keep : {0, 1}) {
        CHECK((partial_trace(rho_bell, {keep}).mat() - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    }
    CHECK_THROWS_AS(partial_trace(rho_bell, {}), ArgumentError);
    CHECK_THROWS_AS(partial_trace(rho_bell, {2}), ArgumentError);
    CHECK(partial_trace(rho_bell, {0, 1}).mat().isApprox(rho_bell.mat()));
}

TEST_CASE("partial trace of a random product factorizes for any kept set") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const StateVector a = random_state({2}, gen), b = random_state({2}, gen), c = random_state({2}, gen);
        const DensityMatrix abc = DensityMatrix::pure(tensor(tensor(a, b), c));
        const Matrix ac = tensor(Operator::projector(a), Operator::projector(c)).mat();
        CHECK((partial_trace(abc, {2, 0}).mat() - ac).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("von Neumann entropy") {
    std::mt19937_64 gen(2);
    CHECK(vn_entropy(DensityMatrix::pure(random_state({2, 2}, gen))) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(vn_entropy(DensityMatrix({2}, 0.5 * Matrix::Identity(2, 2))) == doctest::Approx(1.0));
    const engine2q::EngineParams p(1.0, 1.0, 1.0);
    CHECK(vn_entropy(engine2q::post_measurement_state(p)) == doctest::Approx(1.0).epsilon(1e-12));

    // Invariance under unitary conjugation.
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<StateVector> states{random_state({2, 2}, gen), random_state({2, 2}, gen),
                                              random_state({2, 2}, gen)};
        const DensityMatrix rho = DensityMatrix::mixture({0.5, 0.3, 0.2}, states);
        const Matrix u = Propagator(random_hermitian({2, 2}, gen)).unitary(1.7);
        const DensityMatrix rotated({2, 2}, u * rho.mat() * u.adjoint());
        CHECK(std::abs(vn_entropy(rotated) - vn_entropy(rho)) < 1e-9);
    }
}

TEST_CASE("density matrix invariants") {
    CHECK_THROWS_AS(DensityMatrix({2}, Matrix::Identity(2, 2)), NormError);
    const Matrix negative = (Matrix(2, 2) << 1.5, 0.0, 0.0, -0.5).finished();
    CHECK_THROWS_AS(DensityMatrix({2}, negative), NormError);
    const Matrix skew = (Matrix(2, 2) << 0.5, 0.3, 0.0, 0.5).finished();
    CHECK_THROWS_AS(DensityMatrix({2}, skew), HermiticityError);
}

TEST_CASE("mutual information of a Bell pair is two bits") {
    Vector bell = Vector::Zero(4);
    bell(1) = bell(2) = 1.0 / std::sqrt(2.0);
    const DensityMatrix rho = DensityMatrix::pure(StateVector(kTwoQubits, bell));
    CHECK(mutual_information(rho, {0}) == doctest::Approx(2.0));
}

TEST_CASE("projective measurement") {
    const auto projectors = level_projectors(kTwoQubits, 1);
    TrajectoryRng rng(0, 0);

    const MeasurementOutcome ground = measure_projective(engine2q::ket10(), projectors, rng);
    CHECK(ground.index == 0);
    CHECK(ground.probability == doctest::Approx(1.0));

    const engine2q::EngineParams p(1.0, 1.0, 1.0);
    const ProjectiveMeasurement m(projectors);
    const auto probs = m.probabilities(engine2q::state_at_t0(p));
    CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-12));

    // Collapsed states are eigenstates of the measured projector.
    const MeasurementOutcome o = m.measure(engine2q::state_at_t0(p), rng);
    CHECK(expval(o.state, m.projector(o.index)) == doctest::Approx(1.0));
}

TEST_CASE("projective measurement rejects incomplete or overlapping sets") {
    auto projectors = level_projectors(kTwoQubits, 1);
    TrajectoryRng rng(0, 0);
    CHECK_THROWS_AS(measure_projective(engine2q::ket10(), {projectors[0]}, rng), CompletenessError);
    CHECK_THROWS_AS(ProjectiveMeasurement({projectors[0], projectors[0], projectors[1] - projectors[0]}),
                    CompletenessError);
    CHECK_THROWS_AS(ProjectiveMeasurement({}), CompletenessError);
}

TEST_CASE("measurement statistics follow the Born rule") {
    // delta/g = 2: sin^2(theta) = 1/5. Binomial 3-sigma band over 1e6 draws.
    const engine2q::EngineParams p(1.0, 2.0, 1.0);
    const ProjectiveMeasurement m = engine2q::energy_measurement_on_b();
    const StateVector psi = engine2q::state_at_t0(p);
    constexpr int kTrials = 1000000;
    int excited = 0;
    for (int i = 0; i < kTrials; ++i) {
        TrajectoryRng rng(42, static_cast<std::uint64_t>(i));
        excited += m.measure(psi, rng).index == 1;
    }
    const double freq = static_cast<double>(excited) / kTrials;
    const double sigma = std::sqrt(0.2 * 0.8 / kTrials);
    CHECK(std::abs(freq - 0.2) < 3.0 * sigma);
}

TEST_CASE("measurement is deterministic per seed") {
    const engine2q::EngineParams p(1.0, 1.0, 1.0);
    const ProjectiveMeasurement m = engine2q::energy_measurement_on_b();
    const StateVector psi = engine2q::state_at_t0(p);
    for (std::uint64_t i = 0; i < 50; ++i) {
        TrajectoryRng a(9, i), b(9, i);
        CHECK(m.measure(psi, a).index == m.measure(psi, b).index);
    }
}
