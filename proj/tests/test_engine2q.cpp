#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qfuel/engine2q.hpp"
#include "qfuel/errors.hpp"

using namespace qfuel;
using namespace qfuel::engine2q;
using hilbert::Complex;
using hilbert::StateVector;

namespace {

double sin2(const EngineParams& p) { return std::pow(std::sin(p.theta()), 2); }

// Independent binary entropy in nats converted to bits.
double h2_bits(double p) { return -(p * std::log(p) + (1 - p) * std::log(1 - p)) / std::numbers::ln2; }

}  // namespace

TEST_CASE("engine parameters") {
    const EngineParams p(2.0, 3.0, 4.0);
    CHECK(p.rabi_frequency() == doctest::Approx(5.0));
    CHECK(std::abs(p.rabi_frequency() * p.rabi_frequency() - 25.0) < 1e-12);
    CHECK(std::abs(std::tan(p.theta()) * p.delta() - p.g()) < 1e-12);
    CHECK(p.t0() == doctest::Approx(std::numbers::pi / 5.0));
    CHECK(p.omega_b() == doctest::Approx(5.0));

    const EngineParams resonant(1.0, 0.0, 1.0);
    CHECK(resonant.theta() == doctest::Approx(std::numbers::pi / 2));
    CHECK(measurement_energy(resonant) == 0.0);

    CHECK_THROWS_AS(EngineParams(0.0, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(EngineParams(1.0, -1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(EngineParams(1.0, 1.0, 0.0), ParameterError);
}

TEST_CASE("Hamiltonian structure") {
    const EngineParams p(5.0, 1.0, 0.8);
    const auto off = build_hamiltonian(p, false);
    const auto on = build_hamiltonian(p, true);
    CHECK(on.hermitian());
    CHECK(hilbert::expval(ket10(), off) == doctest::Approx(5.0));
    CHECK((off.mat() * ket10().amps() - 5.0 * ket10().amps()).norm() < 1e-15);
    CHECK(on.mat()(1, 2) == Complex(0.4));  // <01|H|10> = g/2
    CHECK(on.mat()(2, 1) == Complex(0.4));
    CHECK(on.mat()(0, 3) == Complex(0.0));  // <00|H|11>
    // Block diagonal in excitation number.
    for (int i : {0, 3})
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(on.mat()(i, j) == Complex(0.0));
}

TEST_CASE("analytic state") {
    const EngineParams p(5.0, 1.0, 1.0);
    CHECK(fidelity(analytic_state(p, 0.0), ket10()) == doctest::Approx(1.0));
    const StateVector at_t0 = analytic_state(p, p.t0());
    CHECK(at_t0.probability(2) == doctest::Approx(0.5));
    CHECK(at_t0.probability(1) == doctest::Approx(0.5));
    // i [cos(theta)|10> - sin(theta)|01>]
    CHECK(std::abs(at_t0[2] - Complex(0.0, std::cos(p.theta()))) < 1e-12);
    CHECK(std::abs(at_t0[1] - Complex(0.0, -std::sin(p.theta()))) < 1e-12);
}

TEST_CASE("analytic state matches numeric propagation on random parameters") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const EngineParams p(u(gen), u(gen), u(gen));
        const double t = u(gen) * 4.0 * p.t0();
        const StateVector numeric = hilbert::evolve_exact(build_hamiltonian(p, true), ket10(), t);
        CHECK(hilbert::fidelity(numeric, analytic_state(p, t)) >= 1.0 - 1e-9);
    }
}

TEST_CASE("energy components") {
    const EngineParams p(5.0, 1.0, 1.0);
    const EnergyComponents e0 = energy_components(ket10(), p);
    CHECK(e0.total == doctest::Approx(5.0));
    CHECK(e0.local == doctest::Approx(5.0));
    CHECK(e0.interaction == doctest::Approx(0.0));

    const EnergyComponents et0 = energy_components(analytic_state(p, p.t0()), p);
    CHECK(et0.local - 5.0 == doctest::Approx(p.delta() * sin2(p)));
    CHECK(et0.interaction == doctest::Approx(-p.delta() * sin2(p)));

    const TimeSeries trace = engine_trace(p, 400, 2.0 * p.t0());
    for (std::size_t k = 0; k < trace.size(); ++k) {
        CHECK(std::abs(trace.channel("e_total")[k] - 5.0) < 1e-9);
        CHECK(std::abs(trace.channel("e_loc")[k] + trace.channel("e_int")[k] - trace.channel("e_total")[k]) < 1e-10);
        CHECK(trace.channel("e_int")[k] <= 1e-12);
    }
}

TEST_CASE("measurement energy") {
    CHECK(measurement_energy(EngineParams(1.0, 1.0, 1.0)) == doctest::Approx(0.5));
    CHECK(measurement_energy(EngineParams(1.0, 1.0, 1e-9)) < 1e-17);
    CHECK(measurement_energy(EngineParams(1.0, 2.0, 1.0)) == doctest::Approx(0.4));

    // Cross-check: unselective measurement raises <H_2qb> by E^meas and leaves
    // <H_loc> alone.
    for (auto [delta, g] : {std::pair{2.0, 1.0}, std::pair{0.4, 1.3}, std::pair{1.0, 1.0}}) {
        const EngineParams p(3.0, delta, g);
        const auto ops = build_operators(p);
        const auto before = hilbert::DensityMatrix::pure(state_at_t0(p));
        const auto after = post_measurement_state(p);
        CHECK(std::abs(hilbert::expval(after, ops.h_on) - hilbert::expval(before, ops.h_on) - measurement_energy(p)) <
              1e-10);
        CHECK(std::abs(hilbert::expval(after, ops.h_loc) - hilbert::expval(before, ops.h_loc)) < 1e-10);
        CHECK(std::abs(measurement_energy(p) + hilbert::expval(before, ops.v)) < 1e-10);
    }
}

TEST_CASE("measurement entropy") {
    CHECK(measurement_entropy(EngineParams(1.0, 1.0, 1.0)) == doctest::Approx(1.0));
    CHECK(measurement_entropy(EngineParams(1.0, 1.0, 1e-12)) < 1e-20);
    // H2(0.2) = 0.721928094887362... (mpmath).
    const EngineParams p(1.0, 2.0, 1.0);
    CHECK(measurement_entropy(p) == doctest::Approx(0.721928094887362).epsilon(1e-13));
    CHECK(std::abs(measurement_entropy(p) - hilbert::vn_entropy(post_measurement_state(p))) < 1e-10);
    CHECK(std::abs(measurement_entropy(p) - h2_bits(0.2)) < 1e-12);
}

TEST_CASE("ideal memory shares S^meas bits of mutual information with the qubits") {
    for (auto [delta, g] : {std::pair{2.0, 1.0}, std::pair{1.0, 1.0}, std::pair{0.3, 2.0}}) {
        const EngineParams p(1.0, delta, g);
        CHECK(std::abs(measurement_information(p) - measurement_entropy(p)) < 1e-9);
    }
}

TEST_CASE("E^meas and S^meas both peak at delta = g") {
    const double g = 1.3;
    double best_e = -1, best_s = -1, arg_e = 0, arg_s = 0;
    for (int i = 0; i < 400; ++i) {
        const double delta = 0.01 + 4.0 * i / 399.0;
        const EngineParams p(1.0, delta, g);
        if (measurement_energy(p) > best_e) best_e = measurement_energy(p), arg_e = delta;
        if (measurement_entropy(p) > best_s) best_s = measurement_entropy(p), arg_s = delta;
    }
    const double step = 4.0 / 399.0;
    CHECK(std::abs(arg_e - g) <= step / 2 + 1e-12);
    CHECK(std::abs(arg_s - g) <= step / 2 + 1e-12);
}

TEST_CASE("temperature ratio") {
    CHECK(temperature_ratio(EngineParams(1.0, 1.0, 1.0)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(temperature_ratio(EngineParams(1.0, 0.0, 1.0)), DivergentRatioError);

    double previous = 0.0;
    for (double g = 1.0; g <= 50.0; g += 0.25) {
        const double t = temperature_ratio(EngineParams(1.0, 1.0, g));
        CHECK(t > previous);
        previous = t;
    }
}

TEST_CASE("temperature ratio approaches its large-coupling asymptote") {
    auto ratio_at = [](double x) {
        // theta = pi/2 - x  <=>  delta/g = tan(x)
        const EngineParams p(1.0, std::tan(x), 1.0);
        return temperature_ratio(p) / temperature_ratio_asymptote(p);
    };
    // Frozen mpmath values of T / T_asym. At x = 1e-3 the neglected p/ln2 term
    // in H2 still costs 6.75%; within 5% is reached by x = 1e-5.
    CHECK(ratio_at(1e-3) == doctest::Approx(0.932502558652).epsilon(1e-8));
    CHECK(ratio_at(1e-5) == doctest::Approx(0.958378165067).epsilon(1e-8));
    CHECK(std::abs(ratio_at(1e-5) - 1.0) < 0.05);
    double previous = 0.0;
    for (double x : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        const double r = ratio_at(x);
        CHECK(r > previous);
        CHECK(r < 1.0);
        previous = r;
    }
}

TEST_CASE("erasure cost") {
    CHECK(erasure_cost(1.0, 0.0) == 0.0);
    CHECK(erasure_cost(1.0, 2.0) == doctest::Approx(2.0 * std::numbers::ln2));
    CHECK(erasure_cost(measurement_entropy(EngineParams(1.0, 1.0, 1.0)), 0.7) ==
          doctest::Approx(0.7 * std::numbers::ln2));
    CHECK_THROWS_AS(erasure_cost(-1.0, 1.0), ParameterError);
}

TEST_CASE("Bloch coordinates") {
    const auto north = bloch_coordinates(ket10());
    CHECK(north.x == 0.0);
    CHECK(north.y == 0.0);
    CHECK(north.z == 1.0);

    for (auto [delta, g] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}}) {
        const EngineParams p(1.0, delta, g);
        const auto b = bloch_coordinates(analytic_state(p, p.t0()));
        CHECK(b.z == doctest::Approx(std::cos(2 * p.theta())));
        CHECK(b.x * b.x + b.y * b.y + b.z * b.z == doctest::Approx(1.0));
        // The unselective measurement collapses the vector onto the z axis.
        const auto mixed = bloch_coordinates(post_measurement_state(p));
        CHECK(std::abs(mixed.x) < 1e-12);
        CHECK(mixed.z == doctest::Approx(std::cos(2 * p.theta())));
    }

    CHECK_THROWS_AS(bloch_coordinates(StateVector::basis(kDims, 0)), SubspaceError);
}

TEST_CASE("an ideal successful cycle closes the Bloch trajectory") {
    const EngineParams p(1.0, 1.0, 1.0);
    const CycleSimulator sim(p, FeedbackPolicy::ideal());
    for (std::uint64_t i = 0; i < 64; ++i) {
        TrajectoryRng rng(5, i);
        const CycleRecord r = sim.run(rng);
        CHECK(r.final_state_fidelity_to_10 == doctest::Approx(1.0));
        CHECK_FALSE(r.reset_required);
        if (r.outcome == Outcome::ExcitationOnB) {
            CHECK(r.work_extracted == doctest::Approx(p.delta()));
        } else {
            CHECK(r.work_extracted == doctest::Approx(0.0));
        }
        CHECK(r.info_consumed == doctest::Approx(r.entropy_meas));
    }
}

TEST_CASE("switching the coupling on or off costs nothing when <V> = 0") {
    const EngineParams p(2.0, 0.7, 1.1);
    const auto ops = build_operators(p);
    // At t = 0 (product state) and right after the measurement (collapsed state).
    CHECK(std::abs(hilbert::expval(ket10(), ops.h_on) - hilbert::expval(ket10(), ops.h_off)) < 1e-12);
    const auto m = energy_measurement_on_b();
    TrajectoryRng rng(0, 0);
    const auto collapsed = m.measure(state_at_t0(p), rng).state;
    CHECK(std::abs(hilbert::expval(collapsed, ops.h_on) - hilbert::expval(collapsed, ops.h_off)) < 1e-12);
}

TEST_CASE("cycle record invariants across policies") {
    const EngineParams p(1.0, 1.0 / std::sqrt(3.0), 1.0);
    for (const FeedbackPolicy& policy : {FeedbackPolicy::ideal(), FeedbackPolicy::blind(), FeedbackPolicy::partial(0.3)}) {
        const CycleSimulator sim(p, policy, 0.5);
        for (std::uint64_t i = 0; i < 200; ++i) {
            TrajectoryRng rng(1, i);
            const CycleRecord r = sim.run(rng);
            const double w = r.work_extracted / p.delta();
            CHECK((std::abs(w) < 1e-12 || std::abs(w - 1) < 1e-12 || std::abs(w + 1) < 1e-12));
            CHECK(r.info_consumed <= r.entropy_meas + 1e-15);
            CHECK(r.erasure_cost == doctest::Approx(0.5 * std::numbers::ln2 * r.entropy_meas));
            CHECK(r.reset_required == (r.final_state_fidelity_to_10 < 0.5));
        }
    }
}

TEST_CASE("Monte Carlo mean work matches the policies") {
    constexpr std::uint64_t kCycles = 200000;
    SUBCASE("ideal at delta = g") {
        const EngineParams p(1.0, 1.0, 1.0);
        const auto s = run_cycles(p, FeedbackPolicy::ideal(), kCycles, 3, 1);
        const double sigma = p.delta() * std::sqrt(0.25 / kCycles);
        CHECK(std::abs(s.mean_work() - measurement_energy(p)) < 3 * sigma);
        CHECK(s.resets == 0);
    }
    SUBCASE("blind at delta/g = 1/sqrt(3)") {
        const EngineParams p(1.0, 1.0 / std::sqrt(3.0), 1.0);
        CHECK(sin2(p) == doctest::Approx(0.75));
        const auto s = run_cycles(p, FeedbackPolicy::blind(), kCycles, 4, 1);
        const double closed_form = p.delta() * (0.75 - 0.25);
        // Work is +-delta with probabilities 3/4, 1/4: variance 3/4 delta^2.
        const double sigma = p.delta() * std::sqrt(0.75 / kCycles);
        CHECK(std::abs(s.mean_work() - closed_form) < 3 * sigma);
        CHECK(mean_work(p, FeedbackPolicy::blind()) == doctest::Approx(closed_form));
        CHECK(s.mean_info_consumed() == 0.0);
        CHECK(s.resets > 0);
    }
    SUBCASE("partial f = 0.5 at delta = g") {
        const EngineParams p(1.0, 1.0, 1.0);
        const auto cr = conversion_ratio(p, FeedbackPolicy::partial(0.5));
        CHECK(cr.eta == doctest::Approx(0.5));
        CHECK(cr.delta_info == doctest::Approx(0.5));
        const auto s = run_cycles(p, FeedbackPolicy::partial(0.5), kCycles, 5, 1);
        // Work is delta with probability 1/2 * 1/2.
        const double sigma = p.delta() * std::sqrt(0.25 * 0.75 / kCycles);
        CHECK(std::abs(s.mean_work() / measurement_energy(p) - 0.5) < 3 * sigma / measurement_energy(p));
        CHECK(std::abs(s.mean_info_consumed() - 0.5) < 3 * std::sqrt(0.25 / kCycles));
    }
}

TEST_CASE("cycle batches are identical across thread counts") {
    const EngineParams p(1.0, 0.6, 1.0);
    const auto one = run_cycles(p, FeedbackPolicy::partial(0.4), 20000, 11, 1);
    const auto four = run_cycles(p, FeedbackPolicy::partial(0.4), 20000, 11, 4);
    CHECK(one.work_sum == four.work_sum);
    CHECK(one.info_sum == four.info_sum);
    CHECK(one.excitation_on_b == four.excitation_on_b);
    CHECK(one.resets == four.resets);
}

TEST_CASE("conversion ratio") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const EngineParams p(1.0, u(gen), u(gen));
        const auto ideal = conversion_ratio(p, FeedbackPolicy::ideal());
        CHECK(ideal.eta == doctest::Approx(1.0));
        CHECK(ideal.delta_info == doctest::Approx(measurement_entropy(p)));
        for (double f : {0.0, 0.25, 0.9}) {
            const auto cr = conversion_ratio(p, FeedbackPolicy::partial(f));
            CHECK(cr.delta_info <= measurement_entropy(p) + 1e-15);
            CHECK(cr.eta < 1.0);  // eta = 1 only when all information is used
        }
    }

    const auto black = conversion_ratio(EngineParams(1.0, 2.0, 1.0), FeedbackPolicy::blind());
    CHECK(black.eta == 0.0);
    CHECK(black.eta_raw <= 0.0);
    CHECK(black.black_region);
    CHECK(black.delta_info == 0.0);

    const auto blind_ok = conversion_ratio(EngineParams(1.0, 0.5, 1.0), FeedbackPolicy::blind());
    CHECK(blind_ok.eta > 0.0);
    CHECK_FALSE(blind_ok.black_region);

    CHECK_THROWS_AS(conversion_ratio(EngineParams(1.0, 0.0, 1.0), FeedbackPolicy::ideal()), ParameterError);
    CHECK_THROWS_AS(FeedbackPolicy::partial(1.5), ParameterError);
}

TEST_CASE("engine sweep") {
    const auto rows = engine_sweep({0.5, 1.0, 2.0}, {1.0}, 1.0, 0.5);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].e_meas == doctest::Approx(0.5));
    CHECK(rows[1].t_meas == doctest::Approx(0.5));
    for (const auto& r : rows) CHECK(r.eta_ideal == 1.0);
    CHECK(rows[2].eta_blind == 0.0);
    CHECK_THROWS_AS(engine_sweep({}, {1.0}, 1.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(engine_sweep({0.0}, {1.0}, 1.0, 1.0), ParameterError);
}
