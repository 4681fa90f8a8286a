#include "qfuel/engine2q.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qfuel/errors.hpp"
#include "qfuel/parallel.hpp"

namespace qfuel::engine2q {

using hilbert::Complex;
using hilbert::DensityMatrix;
using hilbert::Matrix;
using hilbert::Operator;
using hilbert::StateVector;
using hilbert::Vector;

namespace {

constexpr std::size_t kIndex01 = 1;
constexpr std::size_t kIndex10 = 2;

// Entropy of the two-outcome distribution (p, q); q is passed separately so
// it keeps full relative precision when p is close to one.
double binary_entropy(double p, double q) {
    double s = 0.0;
    for (double x : {p, q}) {
        if (x > 0.0) s -= x * std::log2(x);
    }
    return s;
}

}  // namespace

EngineParams::EngineParams(double omega_a, double delta, double g) : omega_a_(omega_a), delta_(delta), g_(g) {
    if (!(omega_a > 0.0) || !std::isfinite(omega_a)) throw ParameterError("omega_a must be > 0");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be >= 0");
    if (!(g > 0.0) || !std::isfinite(g)) throw ParameterError("g must be > 0");
}

double EngineParams::theta() const { return std::atan2(g_, delta_); }

double EngineParams::rabi_frequency() const { return std::hypot(g_, delta_); }

double EngineParams::t0() const { return std::numbers::pi / rabi_frequency(); }

double EngineParams::transfer_probability() const {
    const double g2 = g_ * g_;
    return g2 / (g2 + delta_ * delta_);
}

EngineOperators build_operators(const EngineParams& p) {
    using hilbert::embed;
    Operator h_loc = p.omega_a() * embed(hilbert::number(), kSiteA, kDims) +
                     p.omega_b() * embed(hilbert::number(), kSiteB, kDims);
    const Operator hop = embed(hilbert::raising(), kSiteA, kDims) * embed(hilbert::lowering(), kSiteB, kDims);
    Operator v = Complex(p.g() / 2.0) * (hop + hop.adjoint());
    Operator h_on = h_loc + v;
    return {h_loc, v, h_on, h_loc};
}

Operator build_hamiltonian(const EngineParams& p, bool coupling_on) {
    EngineOperators ops = build_operators(p);
    return coupling_on ? ops.h_on : ops.h_off;
}

StateVector ket10() { return StateVector::basis(kDims, kIndex10); }
StateVector ket01() { return StateVector::basis(kDims, kIndex01); }

StateVector analytic_state(const EngineParams& p, double t) {
    if (!(t >= 0.0)) throw ArgumentError("analytic_state: t must be >= 0");
    const double half = p.theta() / 2.0;
    const double c = std::cos(half);
    const double s = std::sin(half);
    const Complex plus = std::polar(1.0, p.rabi_frequency() * t / 2.0);
    const Complex minus = std::conj(plus);
    Vector amps = Vector::Zero(4);
    amps(kIndex10) = c * c * plus + s * s * minus;
    amps(kIndex01) = -c * s * (plus - minus);
    return StateVector::normalized(kDims, std::move(amps));
}

EnergyComponents energy_components(const StateVector& psi, const EngineOperators& ops) {
    const double local = hilbert::expval(psi, ops.h_loc);
    const double interaction = hilbert::expval(psi, ops.v);
    return {local + interaction, local, interaction};
}

EnergyComponents energy_components(const StateVector& psi, const EngineParams& p) {
    return energy_components(psi, build_operators(p));
}

hilbert::ProjectiveMeasurement energy_measurement_on_b() {
    return hilbert::ProjectiveMeasurement(hilbert::level_projectors(kDims, kSiteB));
}

StateVector state_at_t0(const EngineParams& p) {
    return hilbert::evolve_exact(build_hamiltonian(p, true), ket10(), p.t0());
}

DensityMatrix post_measurement_state(const EngineParams& p) {
    return energy_measurement_on_b().unselective(DensityMatrix::pure(state_at_t0(p)));
}

double measurement_energy(const EngineParams& p) { return p.delta() * p.transfer_probability(); }

double measurement_entropy(const EngineParams& p) {
    const double g2 = p.g() * p.g();
    const double d2 = p.delta() * p.delta();
    return binary_entropy(g2 / (g2 + d2), d2 / (g2 + d2));
}

double measurement_information(const EngineParams& p) {
    // Joint (A, B, M) state sum_k P_k rho P_k (x) |k><k|_M for an ideal memory M.
    const StateVector psi = state_at_t0(p);
    const auto measurement = energy_measurement_on_b();
    const hilbert::Dims joint_dims{2, 2, 2};
    Matrix joint = Matrix::Zero(8, 8);
    for (std::size_t k = 0; k < measurement.size(); ++k) {
        const Vector branch = measurement.projector(k).mat() * psi.amps();
        Matrix memory = Matrix::Zero(2, 2);
        memory(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
        joint += hilbert::tensor(Operator(kDims, branch * branch.adjoint()), Operator({2}, memory)).mat();
    }
    return hilbert::mutual_information(DensityMatrix(joint_dims, joint), {kSiteA, kSiteB});
}

double temperature_ratio(const EngineParams& p) {
    const double s = measurement_entropy(p);
    if (!(s > 0.0)) {
        throw DivergentRatioError("T^meas diverges: S^meas = 0 at theta = " + std::to_string(p.theta()) +
                                  " (delta = " + std::to_string(p.delta()) + ", g = " + std::to_string(p.g()) +
                                  ")");
    }
    return measurement_energy(p) / s;
}

double temperature_ratio_asymptote(const EngineParams& p) {
    // x = pi/2 - theta = atan(delta / g), accurate for small delta/g.
    const double x = std::atan2(p.delta(), p.g());
    if (!(x > 0.0) || !(x < 1.0)) throw DivergentRatioError("asymptote needs 0 < pi/2 - theta < 1");
    return -p.delta() / (2.0 * x * x * std::log2(x));
}

double erasure_cost(double s_meas_bits, double t_bath) {
    if (!(s_meas_bits >= 0.0)) throw ParameterError("erasure_cost: entropy must be >= 0");
    if (!(t_bath >= 0.0)) throw ParameterError("erasure_cost: bath temperature must be >= 0");
    return t_bath * std::numbers::ln2 * s_meas_bits;
}

BlochVector bloch_coordinates(const StateVector& psi) {
    if (psi.dims() != kDims) throw DimensionError("bloch_coordinates expects a two-qubit state");
    const double outside = std::sqrt(psi.probability(0) + psi.probability(3));
    if (outside >= 1e-9) {
        throw SubspaceError("state has weight " + std::to_string(outside) + " outside {|01>, |10>}");
    }
    const Complex north = psi[kIndex10];
    const Complex south = psi[kIndex01];
    const Complex coherence = std::conj(north) * south;
    return {2.0 * coherence.real(), 2.0 * coherence.imag(), std::norm(north) - std::norm(south)};
}

BlochVector bloch_coordinates(const DensityMatrix& rho) {
    if (rho.dims() != kDims) throw DimensionError("bloch_coordinates expects a two-qubit state");
    const double outside = std::sqrt(std::abs(rho(0, 0)) + std::abs(rho(3, 3)));
    if (outside >= 1e-9) throw SubspaceError("density matrix has weight outside {|01>, |10>}");
    const Complex coherence = rho(kIndex01, kIndex10);
    return {2.0 * coherence.real(), 2.0 * coherence.imag(), (rho(kIndex10, kIndex10) - rho(kIndex01, kIndex01)).real()};
}

FeedbackPolicy FeedbackPolicy::partial(double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw ParameterError("read fraction must lie in [0, 1]");
    return {FeedbackMode::Partial, f};
}

double FeedbackPolicy::effective_read_fraction() const {
    switch (mode) {
        case FeedbackMode::Ideal: return 1.0;
        case FeedbackMode::Blind: return 0.0;
        case FeedbackMode::Partial: return read_fraction;
    }
    return 0.0;
}

const char* to_string(FeedbackMode mode) {
    switch (mode) {
        case FeedbackMode::Ideal: return "ideal";
        case FeedbackMode::Blind: return "blind";
        case FeedbackMode::Partial: return "partial";
    }
    return "?";
}

// -------------------------------------------------------------- cycles

CycleSimulator::CycleSimulator(const EngineParams& p, FeedbackPolicy policy, double t_bath)
    : params_(p),
      policy_(policy),
      t_bath_(t_bath),
      ops_(build_operators(p)),
      psi_t0_(hilbert::Propagator(ops_.h_on).evolve(ket10(), p.t0())),
      measurement_(energy_measurement_on_b()),
      pulses_(hilbert::tensor(Operator({2}, hilbert::pauli_x()), Operator({2}, hilbert::pauli_x()))),
      s_meas_(measurement_entropy(p)),
      blind_pulses_(p.transfer_probability() > 0.5) {
    if (policy_.mode == FeedbackMode::Partial) FeedbackPolicy::partial(policy_.read_fraction);
    if (!(t_bath >= 0.0)) throw ParameterError("bath temperature must be >= 0");
}

CycleRecord CycleSimulator::run(TrajectoryRng& rng) const {
    // (ii) local projective energy measurement of B, outcome stored in memory.
    const hilbert::MeasurementOutcome m = measurement_.measure(psi_t0_, rng);
    const Outcome outcome = m.index == 1 ? Outcome::ExcitationOnB : Outcome::ExcitationOnA;

    // (iii) coupling switched off (free: <V> = 0 on the collapsed state), feedback.
    bool read = false;
    switch (policy_.mode) {
        case FeedbackMode::Ideal: read = true; break;
        case FeedbackMode::Blind: read = false; break;
        case FeedbackMode::Partial: read = rng.uniform() < policy_.read_fraction; break;
    }
    const bool pulse = read ? outcome == Outcome::ExcitationOnB : blind_pulses_;
    const StateVector after = pulse ? pulses_.apply(m.state) : m.state;

    const double e_before = hilbert::expval(m.state, ops_.h_off);
    const double e_after = hilbert::expval(after, ops_.h_off);
    const double f10 = hilbert::fidelity(after, ket10());
    const bool reset = f10 < 1.0 - 1e-9;

    CycleRecord r{};
    r.outcome = outcome;
    r.work_extracted = e_before - e_after;
    r.entropy_meas = s_meas_;
    r.info_consumed = read ? s_meas_ : 0.0;
    // (iv) the memory holds S^meas bits whatever the feedback did with them.
    r.erasure_cost = erasure_cost(s_meas_, t_bath_);
    r.final_state_fidelity_to_10 = f10;
    r.memory_read = read;
    r.pulses_applied = pulse;
    r.reset_required = reset;
    r.reset_energy = reset ? e_after - params_.omega_a() : 0.0;
    return r;
}

CycleRecord run_cycle(const EngineParams& p, const FeedbackPolicy& policy, TrajectoryRng& rng, double t_bath) {
    return CycleSimulator(p, policy, t_bath).run(rng);
}

CycleStatistics CycleStatistics::of(const CycleRecord& r) {
    CycleStatistics s;
    s.cycles = 1;
    s.excitation_on_b = r.outcome == Outcome::ExcitationOnB ? 1 : 0;
    s.memory_reads = r.memory_read ? 1 : 0;
    s.resets = r.reset_required ? 1 : 0;
    s.work_sum = r.work_extracted;
    s.work_sq_sum = r.work_extracted * r.work_extracted;
    s.info_sum = r.info_consumed;
    s.erasure_sum = r.erasure_cost;
    s.reset_energy_sum = r.reset_energy;
    return s;
}

CycleStatistics operator+(const CycleStatistics& a, const CycleStatistics& b) {
    CycleStatistics s;
    s.cycles = a.cycles + b.cycles;
    s.excitation_on_b = a.excitation_on_b + b.excitation_on_b;
    s.memory_reads = a.memory_reads + b.memory_reads;
    s.resets = a.resets + b.resets;
    s.work_sum = a.work_sum + b.work_sum;
    s.work_sq_sum = a.work_sq_sum + b.work_sq_sum;
    s.info_sum = a.info_sum + b.info_sum;
    s.erasure_sum = a.erasure_sum + b.erasure_sum;
    s.reset_energy_sum = a.reset_energy_sum + b.reset_energy_sum;
    return s;
}

double CycleStatistics::mean_work() const { return cycles ? work_sum / static_cast<double>(cycles) : 0.0; }

double CycleStatistics::work_standard_error() const {
    if (cycles < 2) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(cycles);
    const double mean = work_sum / n;
    const double var = std::max(0.0, (work_sq_sum - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
}

double CycleStatistics::success_fraction() const {
    return cycles ? static_cast<double>(excitation_on_b) / static_cast<double>(cycles) : 0.0;
}

double CycleStatistics::mean_info_consumed() const {
    return cycles ? info_sum / static_cast<double>(cycles) : 0.0;
}

double CycleStatistics::mean_erasure_cost() const {
    return cycles ? erasure_sum / static_cast<double>(cycles) : 0.0;
}

CycleStatistics run_cycles(const EngineParams& p, const FeedbackPolicy& policy, std::uint64_t cycles,
                           std::uint64_t seed, unsigned threads, double t_bath) {
    const CycleSimulator sim(p, policy, t_bath);
    return reduce_trajectories<CycleStatistics>(cycles, threads, [&](std::uint64_t i) {
        TrajectoryRng rng(seed, i);
        return CycleStatistics::of(sim.run(rng));
    });
}

double mean_work(const EngineParams& p, const FeedbackPolicy& policy) {
    const double success = p.transfer_probability();
    const double ideal = p.delta() * success;
    const double blind = success > 0.5 ? p.delta() * (success - (1.0 - success)) : 0.0;
    const double f = policy.effective_read_fraction();
    return f * ideal + (1.0 - f) * blind;
}

ConversionRatio conversion_ratio(const EngineParams& p, const FeedbackPolicy& policy) {
    const double e_meas = measurement_energy(p);
    if (!(e_meas > 0.0)) throw ParameterError("conversion ratio undefined: E^meas = 0");
    const double raw = mean_work(p, policy) / e_meas;
    return {std::max(0.0, raw), raw, policy.effective_read_fraction() * measurement_entropy(p), raw <= 0.0};
}

// -------------------------------------------------------------- traces

TimeSeries engine_trace(const EngineParams& p, std::size_t samples, double t_end) {
    if (samples < 2) throw ArgumentError("engine_trace needs at least 2 samples");
    if (!(t_end > 0.0)) throw ArgumentError("engine_trace needs t_end > 0");
    const EngineOperators ops = build_operators(p);
    const hilbert::Propagator prop(ops.h_on);
    const StateVector psi0 = ket10();

    std::vector<double> times(samples);
    std::vector<double> e_total(samples), e_loc(samples), e_int(samples);
    std::vector<double> p10(samples), p01(samples), bx(samples), by(samples), bz(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = t_end * static_cast<double>(k) / static_cast<double>(samples - 1);
        const StateVector psi = prop.evolve(psi0, t);
        const EnergyComponents e = energy_components(psi, ops);
        const BlochVector b = bloch_coordinates(psi);
        times[k] = t;
        e_total[k] = e.total;
        e_loc[k] = e.local;
        e_int[k] = e.interaction;
        p10[k] = psi.probability(kIndex10);
        p01[k] = psi.probability(kIndex01);
        bx[k] = b.x;
        by[k] = b.y;
        bz[k] = b.z;
    }
    TimeSeries ts(std::move(times));
    ts.add_channel("e_total", std::move(e_total));
    ts.add_channel("e_loc", std::move(e_loc));
    ts.add_channel("e_int", std::move(e_int));
    ts.add_channel("p_10", std::move(p10));
    ts.add_channel("p_01", std::move(p01));
    ts.add_channel("bloch_x", std::move(bx));
    ts.add_channel("bloch_y", std::move(by));
    ts.add_channel("bloch_z", std::move(bz));
    return ts;
}

std::vector<SweepRow> engine_sweep(const std::vector<double>& deltas, const std::vector<double>& gs, double omega_a,
                                   double read_fraction) {
    if (deltas.empty() || gs.empty()) throw ArgumentError("engine_sweep: empty grid");
    const FeedbackPolicy partial = FeedbackPolicy::partial(read_fraction);
    std::vector<SweepRow> rows;
    rows.reserve(deltas.size() * gs.size());
    for (double g : gs) {
        for (double delta : deltas) {
            if (!(delta > 0.0)) throw ParameterError("engine_sweep: delta grid must be > 0");
            const EngineParams p(omega_a, delta, g);
            SweepRow row{};
            row.delta = delta;
            row.g = g;
            row.e_meas = measurement_energy(p);
            row.s_meas = measurement_entropy(p);
            row.t_meas = row.s_meas > 0.0 ? row.e_meas / row.s_meas : std::numeric_limits<double>::infinity();
            row.eta_ideal = conversion_ratio(p, FeedbackPolicy::ideal()).eta;
            row.eta_blind = conversion_ratio(p, FeedbackPolicy::blind()).eta;
            const ConversionRatio cr = conversion_ratio(p, partial);
            row.eta_partial = cr.eta;
            row.delta_info = cr.delta_info;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace qfuel::engine2q
