#include "qfuel/chain.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qfuel/errors.hpp"
#include "qfuel/parallel.hpp"

namespace qfuel::chain {

ChainParams::ChainParams(int n, double omega_a, double delta, double g)
    : n_(n), omega_a_(omega_a), delta_(delta), g_(g) {
    if (n < 2) throw ParameterError("chain needs n >= 2, got " + std::to_string(n));
    if (!(omega_a > 0.0) || !std::isfinite(omega_a)) throw ParameterError("omega_a must be > 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("chain detuning delta must be > 0");
    if (!(g > 0.0) || !std::isfinite(g)) throw ParameterError("g must be > 0");
}

double ChainParams::qubit_frequency(int i) const {
    if (i < 1 || i > n_) throw ArgumentError("qubit index out of range");
    return omega_a_ + (i - 1) * hop_detuning();
}

double ChainParams::rabi_frequency() const { return std::hypot(g_, hop_detuning()); }

double ChainParams::theta() const { return std::atan2((n_ - 1) * g_, delta_); }

double ChainParams::hop_duration() const { return std::numbers::pi / rabi_frequency(); }

double ChainParams::hop_probability() const {
    const double x = (n_ - 1) * g_;
    return x * x / (x * x + delta_ * delta_);
}

engine2q::EngineParams ChainParams::hop_engine(int k) const {
    if (k < 1 || k >= n_) throw ArgumentError("hop index out of range");
    return engine2q::EngineParams(qubit_frequency(k), hop_detuning(), g_);
}

double success_probability(const ChainParams& p) {
    // log sin^2(theta_N) = -log1p(cot^2(theta_N)); stays accurate for N ~ 1e4.
    const double cot = p.delta() / ((p.n() - 1) * p.g());
    return std::exp(-(p.n() - 1) * std::log1p(cot * cot));
}

double simulated_hop_probability(const ChainParams& p, int k) {
    const engine2q::EngineParams hop = p.hop_engine(k);
    const hilbert::StateVector psi =
        hilbert::evolve_exact(engine2q::build_hamiltonian(hop, true), engine2q::ket10(), p.hop_duration());
    return engine2q::energy_measurement_on_b().probabilities(psi)[1];
}

ChainSimulator::ChainSimulator(const ChainParams& p) : params_(p) {
    hop_probabilities_.reserve(static_cast<std::size_t>(p.n() - 1));
    for (int k = 1; k < p.n(); ++k) hop_probabilities_.push_back(simulated_hop_probability(p, k));
}

ChainRecord ChainSimulator::run(TrajectoryRng& rng) const {
    ChainRecord r;
    for (double p_hop : hop_probabilities_) {
        const bool transferred = rng.bernoulli(p_hop);
        r.per_hop_outcomes.push_back(transferred);
        if (!transferred) break;
        ++r.hops_completed;
    }
    const int hops = static_cast<int>(hop_probabilities_.size());
    r.success = r.hops_completed == hops;
    r.excitation_site = r.hops_completed + 1;
    r.energy_gain = r.hops_completed * params_.hop_detuning();
    return r;
}

ChainRecord run_chain(const ChainParams& p, TrajectoryRng& rng) { return ChainSimulator(p).run(rng); }

ChainStatistics ChainStatistics::of(const ChainRecord& r) {
    return {1, r.success ? 1u : 0u, static_cast<std::uint64_t>(r.hops_completed), r.energy_gain};
}

ChainStatistics operator+(const ChainStatistics& a, const ChainStatistics& b) {
    return {a.runs + b.runs, a.successes + b.successes, a.hops + b.hops, a.energy_sum + b.energy_sum};
}

double ChainStatistics::frequency() const {
    return runs ? static_cast<double>(successes) / static_cast<double>(runs) : 0.0;
}

double ChainStatistics::standard_error() const {
    if (runs == 0) return 0.0;
    const double f = frequency();
    return std::sqrt(f * (1.0 - f) / static_cast<double>(runs));
}

double ChainStatistics::mean_hops() const {
    return runs ? static_cast<double>(hops) / static_cast<double>(runs) : 0.0;
}

double ChainStatistics::mean_energy_gain() const { return runs ? energy_sum / static_cast<double>(runs) : 0.0; }

ChainStatistics run_chains(const ChainParams& p, std::uint64_t runs, std::uint64_t seed, unsigned threads) {
    const ChainSimulator sim(p);
    return reduce_trajectories<ChainStatistics>(runs, threads, [&](std::uint64_t i) {
        TrajectoryRng rng(seed, i);
        return ChainStatistics::of(sim.run(rng));
    });
}

std::vector<SweepRow> sweep_chain(const std::vector<int>& n_values, const std::vector<double>& ratios,
                                  const SweepOptions& options) {
    if (n_values.empty() || ratios.empty()) throw ArgumentError("sweep_chain: empty grid");
    std::vector<SweepRow> rows;
    rows.reserve(n_values.size() * ratios.size());
    std::uint64_t cell = 0;
    for (int n : n_values) {
        for (double ratio : ratios) {
            const ChainParams p(n, options.omega_a, options.delta, ratio * options.delta);
            SweepRow row{n, ratio, success_probability(p), std::nullopt};
            if (options.trajectories > 0) {
                row.monte_carlo = run_chains(p, options.trajectories, splitmix64(options.seed + cell), options.threads);
            }
            rows.push_back(row);
            ++cell;
        }
    }
    return rows;
}

}  // namespace qfuel::chain
