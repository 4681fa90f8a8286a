#pragma once

// Up-conversion along an N-qubit ladder: omega_i = omega_a + (i-1) delta/(N-1).
// The excitation starts on qubit 1; each hop couples (k, k+1) for pi/Omega_N,
// then measures qubit k+1. The run stops at the first hop that fails.

#include <cstdint>
#include <optional>
#include <vector>

#include "qfuel/engine2q.hpp"
#include "qfuel/rng.hpp"

namespace qfuel::chain {

class ChainParams {
  public:
    // Throws ParameterError unless n >= 2, omega_a > 0, delta > 0, g > 0.
    ChainParams(int n, double omega_a, double delta, double g);

    int n() const { return n_; }
    double omega_a() const { return omega_a_; }
    double delta() const { return delta_; }
    double g() const { return g_; }

    // Frequency of qubit i, 1-based.
    double qubit_frequency(int i) const;
    double hop_detuning() const { return delta_ / (n_ - 1); }
    double rabi_frequency() const;
    // tan(theta_N) = (N-1) g / delta.
    double theta() const;
    double hop_duration() const;
    // sin^2(theta_N), the per-hop transfer probability.
    double hop_probability() const;
    // Two-qubit engine equivalent to hop k (1-based: qubits k and k+1).
    engine2q::EngineParams hop_engine(int k) const;

  private:
    int n_;
    double omega_a_;
    double delta_;
    double g_;
};

// sin^{2(N-1)}(theta_N).
double success_probability(const ChainParams& p);

// Born probability that hop k lands on qubit k+1, from numerically propagating
// the hop's two-qubit Hamiltonian for t_N.
double simulated_hop_probability(const ChainParams& p, int k);

struct ChainRecord {
    int hops_completed = 0;
    bool success = false;
    double energy_gain = 0.0;
    std::vector<bool> per_hop_outcomes;
    // 1-based qubit holding the excitation when the run ended.
    int excitation_site = 1;
};

class ChainSimulator {
  public:
    explicit ChainSimulator(const ChainParams& p);

    ChainRecord run(TrajectoryRng& rng) const;

    const ChainParams& params() const { return params_; }
    const std::vector<double>& hop_probabilities() const { return hop_probabilities_; }

  private:
    ChainParams params_;
    std::vector<double> hop_probabilities_;
};

ChainRecord run_chain(const ChainParams& p, TrajectoryRng& rng);

struct ChainStatistics {
    std::uint64_t runs = 0;
    std::uint64_t successes = 0;
    std::uint64_t hops = 0;
    double energy_sum = 0.0;

    static ChainStatistics of(const ChainRecord& r);
    friend ChainStatistics operator+(const ChainStatistics& a, const ChainStatistics& b);

    double frequency() const;
    // Binomial standard error sqrt(f (1 - f) / runs) of the success frequency.
    double standard_error() const;
    double mean_hops() const;
    double mean_energy_gain() const;
};

// Run i uses TrajectoryRng(seed, i); bit-identical for any thread count.
ChainStatistics run_chains(const ChainParams& p, std::uint64_t runs, std::uint64_t seed, unsigned threads);

struct SweepOptions {
    double omega_a = 1.0;
    double delta = 1.0;
    std::uint64_t trajectories = 0;  // 0: analytic column only
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct SweepRow {
    int n;
    double g_over_delta;
    double analytic;
    std::optional<ChainStatistics> monte_carlo;
};

// Rows ordered by n, then by ratio. Each Monte Carlo cell uses its own
// master seed derived from (seed, row index).
std::vector<SweepRow> sweep_chain(const std::vector<int>& n_values, const std::vector<double>& ratios,
                                  const SweepOptions& options);

}  // namespace qfuel::chain
