#include "qfuel/meter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "qfuel/errors.hpp"

namespace qfuel::meter {

using hilbert::Complex;
using hilbert::Operator;
using hilbert::StateVector;
using hilbert::Vector;

namespace {

constexpr std::size_t k100 = 4;
constexpr std::size_t k101 = 5;
constexpr std::size_t k010 = 2;
constexpr std::size_t k011 = 3;

void check_time(const MeterParams& p, double t) {
    const double slack = 1e-12 * std::max(1.0, p.t_m());
    if (t < p.t0() - slack || t > p.t_m() + slack) {
        throw ArgumentError("time " + std::to_string(t) + " outside the readout window [" + std::to_string(p.t0()) +
                            ", " + std::to_string(p.t_m()) + "]");
    }
}

}  // namespace

MeterParams::MeterParams(engine2q::EngineParams engine, double chi, std::size_t samples,
                         ReadoutConvention convention)
    : engine_(engine), chi_(chi), samples_(samples), convention_(convention) {
    if (!(chi > 0.0) || !std::isfinite(chi)) throw ParameterError("chi must be > 0");
    if (epsilon() > kEpsilonCap) {
        throw ParameterError("epsilon = g/chi = " + std::to_string(epsilon()) + " exceeds the cap " +
                             std::to_string(kEpsilonCap));
    }
    if (samples_ < 2) throw ParameterError("meter time grid needs at least 2 samples");
    if (dt() > max_step(chi_) * (1.0 + 1e-12)) {
        throw ParameterError("time step " + std::to_string(dt()) + " exceeds (2 pi/chi)/50 = " +
                             std::to_string(max_step(chi_)));
    }
}

MeterParams MeterParams::with_step(engine2q::EngineParams engine, double chi, double dt,
                                   ReadoutConvention convention) {
    if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
    if (!(chi > 0.0)) throw ParameterError("chi must be > 0");
    if (dt > max_step(chi) * (1.0 + 1e-12)) {
        throw ParameterError("dt = " + std::to_string(dt) + " exceeds (2 pi/chi)/50 = " + std::to_string(max_step(chi)));
    }
    const double kappa = convention == ReadoutConvention::HalfChi ? chi / 2.0 : chi;
    const double duration = std::numbers::pi / (2.0 * kappa);
    const auto intervals = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
    return MeterParams(engine, chi, std::max<std::size_t>(intervals, 1) + 1, convention);
}

double MeterParams::coupling() const {
    return convention_ == ReadoutConvention::HalfChi ? chi_ / 2.0 : chi_;
}

double MeterParams::readout_duration() const { return std::numbers::pi / (2.0 * coupling()); }

double MeterParams::max_step(double chi) { return (2.0 * std::numbers::pi / chi) / 50.0; }

MeterOperators build_meter_operators(const MeterParams& p) {
    using hilbert::embed;
    const auto& e = p.engine();
    const Operator n_a = embed(hilbert::number(), engine2q::kSiteA, kDims);
    const Operator n_b = embed(hilbert::number(), engine2q::kSiteB, kDims);
    const Operator h_loc = e.omega_a() * n_a + e.omega_b() * n_b;
    const Operator hop =
        embed(hilbert::raising(), engine2q::kSiteA, kDims) * embed(hilbert::lowering(), engine2q::kSiteB, kDims);
    const Operator v = Complex(e.g() / 2.0) * (hop + hop.adjoint());
    const Operator v_m = Complex(p.coupling()) * (n_b * embed(hilbert::pauli_x(), kSiteMeter, kDims));
    return {h_loc, v, v_m, h_loc + v, h_loc + v + v_m};
}

Operator build_meter_hamiltonian(const MeterParams& p, bool meter_on) {
    const MeterOperators ops = build_meter_operators(p);
    return meter_on ? ops.h : ops.h_2qb;
}

StateVector initial_state(const MeterParams& p) {
    const double theta = p.engine().theta();
    Vector amps = Vector::Zero(8);
    amps(k100) = Complex(0.0, std::cos(theta));
    amps(k010) = Complex(0.0, -std::sin(theta));
    return StateVector::normalized(kDims, std::move(amps));
}

PremeasurementRun simulate_premeasurement(const MeterParams& p) {
    const MeterOperators ops = build_meter_operators(p);
    const hilbert::Propagator prop(ops.h);
    const StateVector psi0 = initial_state(p);
    const std::size_t n = p.samples();

    std::vector<double> times(n);
    std::vector<double> p100(n), p101(n), p010(n), p011(n);
    std::vector<double> e_2qb(n), e_loc(n), e_int(n), e_meter(n), e_total(n), coherence(n), e_int_1(n);
    std::vector<StateVector> states;
    states.reserve(n);

    for (std::size_t k = 0; k < n; ++k) {
        const double tau = p.readout_duration() * static_cast<double>(k) / static_cast<double>(n - 1);
        const double t = p.t0() + tau;
        StateVector psi = prop.evolve(psi0, tau);
        times[k] = t;
        p100[k] = psi.probability(k100);
        p101[k] = psi.probability(k101);
        p010[k] = psi.probability(k010);
        p011[k] = psi.probability(k011);
        e_loc[k] = hilbert::expval(psi, ops.h_loc);
        e_int[k] = hilbert::expval(psi, ops.v);
        e_meter[k] = hilbert::expval(psi, ops.v_m);
        e_2qb[k] = e_loc[k] + e_int[k];
        e_total[k] = e_2qb[k] + e_meter[k];
        const auto rho_ab = hilbert::partial_trace(hilbert::DensityMatrix::pure(psi),
                                                   {engine2q::kSiteA, engine2q::kSiteB});
        coherence[k] = std::abs(rho_ab(2, 1));
        e_int_1[k] = first_order_binding_energy(p, std::min(t, p.t_m()));
        states.push_back(std::move(psi));
    }

    TimeSeries ts(std::move(times));
    ts.add_channel("p_100", std::move(p100));
    ts.add_channel("p_101", std::move(p101));
    ts.add_channel("p_010", std::move(p010));
    ts.add_channel("p_011", std::move(p011));
    ts.add_channel("e_2qb", std::move(e_2qb));
    ts.add_channel("e_loc", std::move(e_loc));
    ts.add_channel("e_int", std::move(e_int));
    ts.add_channel("e_meter", std::move(e_meter));
    ts.add_channel("e_total", std::move(e_total));
    ts.add_channel("coherence_ab", std::move(coherence));
    ts.add_channel("e_int_first_order", std::move(e_int_1));
    return {std::move(ts), std::move(states)};
}

StateVector zeroth_order_state(const MeterParams& p, double t) {
    check_time(p, t);
    const double tau = std::clamp(t - p.t0(), 0.0, p.readout_duration());
    const auto& e = p.engine();
    const double c = std::cos(e.theta());
    const double s = std::sin(e.theta());
    const Complex i(0.0, 1.0);
    const Complex phase_a = std::polar(1.0, -e.omega_a() * tau);
    const Complex phase_b = std::polar(1.0, -e.omega_b() * tau);
    const double turn = p.coupling() * tau;

    Vector amps = Vector::Zero(8);
    amps(k100) = i * c * phase_a;
    amps(k010) = -i * s * phase_b * std::cos(turn);
    amps(k011) = -i * s * phase_b * (-i * std::sin(turn));
    return StateVector::normalized(kDims, std::move(amps));
}

double first_order_binding_energy(const MeterParams& p, double t) {
    check_time(p, t);
    const double tau = std::clamp(t - p.t0(), 0.0, p.readout_duration());
    const auto& e = p.engine();
    return -engine2q::measurement_energy(e) * std::cos(e.delta() * tau) * std::cos(p.coupling() * tau);
}

double switch_off_cost(const PremeasurementRun& run) { return -run.series.channel("e_meter").back(); }

double switch_off_cost(const MeterParams& p) {
    const MeterOperators ops = build_meter_operators(p);
    const StateVector psi = hilbert::evolve_exact(ops.h, initial_state(p), p.readout_duration());
    return -hilbert::expval(psi, ops.v_m);
}

ConvergencePoint convergence_point(const MeterParams& p) {
    const PremeasurementRun run = simulate_premeasurement(p);
    const TimeSeries& ts = run.series;
    const double e_meas = engine2q::measurement_energy(p.engine());

    ConvergencePoint c{};
    c.chi = p.chi();
    c.epsilon = p.epsilon();
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const StateVector zeroth = zeroth_order_state(p, std::min(ts.times()[k], p.t_m()));
        for (std::size_t idx = 0; idx < zeroth.dimension(); ++idx) {
            c.population_deviation =
                std::max(c.population_deviation, std::abs(run.states[k].probability(idx) - zeroth.probability(idx)));
        }
        c.infidelity = std::max(c.infidelity, 1.0 - hilbert::fidelity(zeroth, run.states[k]));
        c.energy_deviation =
            std::max(c.energy_deviation, std::abs(ts.channel("e_int")[k] - ts.channel("e_int_first_order")[k]));
    }
    c.switch_off_cost = switch_off_cost(run);
    c.switch_off_gap = std::abs(c.switch_off_cost - e_meas) / e_meas;
    c.h_loc_drift = ts.channel("e_loc").back() - ts.channel("e_loc").front();
    return c;
}

std::vector<ConvergencePoint> convergence_study(const engine2q::EngineParams& engine,
                                                const std::vector<double>& chi_over_omega, std::size_t samples,
                                                unsigned threads, ReadoutConvention convention) {
    if (chi_over_omega.empty()) throw ArgumentError("convergence_study: no chi values");
    // Validate every point up front so errors surface on the calling thread.
    std::vector<MeterParams> params;
    params.reserve(chi_over_omega.size());
    for (double r : chi_over_omega) params.emplace_back(engine, r * engine.rabi_frequency(), samples, convention);

    std::vector<ConvergencePoint> out(params.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < params.size(); i = next++) out[i] = convergence_point(params[i]);
    };
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), params.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    }
    return out;
}

double fit_order(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ArgumentError("fit_order needs >= 2 matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ArgumentError("fit_order needs positive data");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace qfuel::meter
