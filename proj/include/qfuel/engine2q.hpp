#pragma once

// Two-qubit engine fueled by a local energy measurement on an entangled pair.
//
// Qubit A (site 0) is red-detuned, qubit B (site 1) blue-detuned by delta.
// The cycle: start in |10>, let the excitation slosh for t0 = pi/Omega under
// H = H_loc + V, measure B's energy, feed back with pi pulses, erase the memory.

#include <cstdint>
#include <vector>

#include "qfuel/hilbert.hpp"
#include "qfuel/rng.hpp"
#include "qfuel/timeseries.hpp"

namespace qfuel::engine2q {

inline constexpr int kSiteA = 0;
inline constexpr int kSiteB = 1;
inline const hilbert::Dims kDims{2, 2};

class EngineParams {
  public:
    // Throws ParameterError unless omega_a > 0, delta >= 0 and g > 0.
    EngineParams(double omega_a, double delta, double g);

    double omega_a() const { return omega_a_; }
    double omega_b() const { return omega_a_ + delta_; }
    double delta() const { return delta_; }
    double g() const { return g_; }

    // Mixing angle, tan(theta) = g / delta; pi/2 when delta = 0.
    double theta() const;
    // Generalized Rabi frequency sqrt(g^2 + delta^2).
    double rabi_frequency() const;
    // Measurement time pi / Omega, at which the transfer to B peaks.
    double t0() const;
    // sin^2(theta) = g^2 / (g^2 + delta^2), computed without trig round-off.
    double transfer_probability() const;

  private:
    double omega_a_;
    double delta_;
    double g_;
};

struct EngineOperators {
    hilbert::Operator h_loc;
    hilbert::Operator v;
    hilbert::Operator h_on;   // h_loc + v
    hilbert::Operator h_off;  // h_loc
};

EngineOperators build_operators(const EngineParams& p);
hilbert::Operator build_hamiltonian(const EngineParams& p, bool coupling_on);

hilbert::StateVector ket10();
hilbert::StateVector ket01();

// Closed-form |psi(t)> from |10>, in the frame rotating at (omega_a + omega_b)/2.
hilbert::StateVector analytic_state(const EngineParams& p, double t);

struct EnergyComponents {
    double total;
    double local;
    double interaction;
};

EnergyComponents energy_components(const hilbert::StateVector& psi, const EngineParams& p);
EnergyComponents energy_components(const hilbert::StateVector& psi, const EngineOperators& ops);

// Projectors onto B in |0> and |1>; outcome index 1 means the excitation is on B.
hilbert::ProjectiveMeasurement energy_measurement_on_b();

// State just before the measurement, numerically propagated from |10>.
hilbert::StateVector state_at_t0(const EngineParams& p);
// Outcome-averaged two-qubit state after measuring B at t0.
hilbert::DensityMatrix post_measurement_state(const EngineParams& p);

// E^meas = -<V(t0)> = hbar * delta * sin^2(theta).
double measurement_energy(const EngineParams& p);
// Binary entropy of sin^2(theta), in bits.
double measurement_entropy(const EngineParams& p);
// Mutual information between the qubit pair and an ideal classical memory
// recording the outcome, computed on the joint (A, B, memory) state.
double measurement_information(const EngineParams& p);

// E^meas / S^meas. Throws DivergentRatioError when S^meas vanishes.
double temperature_ratio(const EngineParams& p);
// Large-coupling asymptote -hbar delta / [2 x^2 log2 x], x = pi/2 - theta.
double temperature_ratio_asymptote(const EngineParams& p);

// Minimal Landauer cost k_B T ln2 * bits, with k_B = 1.
double erasure_cost(double s_meas_bits, double t_bath);

struct BlochVector {
    double x;
    double y;
    double z;
};

// Bloch vector of the effective two-level system {|10> (north), |01>}.
BlochVector bloch_coordinates(const hilbert::StateVector& psi);
BlochVector bloch_coordinates(const hilbert::DensityMatrix& rho);

enum class FeedbackMode { Ideal, Blind, Partial };

// Ideal reads the memory and pulses iff B was found excited. Blind never
// reads it and pulses whenever sin^2(theta) > 1/2. Partial reads the memory
// with probability read_fraction and otherwise acts blindly.
struct FeedbackPolicy {
    FeedbackMode mode = FeedbackMode::Ideal;
    double read_fraction = 1.0;

    static FeedbackPolicy ideal() { return {FeedbackMode::Ideal, 1.0}; }
    static FeedbackPolicy blind() { return {FeedbackMode::Blind, 0.0}; }
    static FeedbackPolicy partial(double f);

    // Probability that the memory is consulted in a cycle.
    double effective_read_fraction() const;
};

const char* to_string(FeedbackMode mode);

enum class Outcome { ExcitationOnB, ExcitationOnA };

struct CycleRecord {
    Outcome outcome;
    double work_extracted;   // energy released by the pi pulses (may be -delta)
    double entropy_meas;     // memory entropy, bits
    double info_consumed;    // bits of memory actually used by the feedback
    double erasure_cost;     // Landauer cost of resetting the memory
    double final_state_fidelity_to_10;
    bool memory_read;
    bool pulses_applied;
    // Set when the qubits end the feedback away from |10>. reset_energy is
    // the qubit energy above hbar*omega_a released by that extra step; it is
    // kept out of work_extracted.
    bool reset_required;
    double reset_energy;
};

// One engine with everything that does not depend on the random draws
// precomputed: operators, |psi(t0)>, the B measurement, the pulse operator.
class CycleSimulator {
  public:
    CycleSimulator(const EngineParams& p, FeedbackPolicy policy, double t_bath = 0.0);

    CycleRecord run(TrajectoryRng& rng) const;

    const EngineParams& params() const { return params_; }
    const FeedbackPolicy& policy() const { return policy_; }
    const hilbert::StateVector& pre_measurement_state() const { return psi_t0_; }

  private:
    EngineParams params_;
    FeedbackPolicy policy_;
    double t_bath_;
    EngineOperators ops_;
    hilbert::StateVector psi_t0_;
    hilbert::ProjectiveMeasurement measurement_;
    hilbert::Operator pulses_;
    double s_meas_;
    bool blind_pulses_;
};

CycleRecord run_cycle(const EngineParams& p, const FeedbackPolicy& policy, TrajectoryRng& rng,
                      double t_bath = 0.0);

struct CycleStatistics {
    std::uint64_t cycles = 0;
    std::uint64_t excitation_on_b = 0;
    std::uint64_t memory_reads = 0;
    std::uint64_t resets = 0;
    double work_sum = 0.0;
    double work_sq_sum = 0.0;
    double info_sum = 0.0;
    double erasure_sum = 0.0;
    double reset_energy_sum = 0.0;

    static CycleStatistics of(const CycleRecord& r);
    friend CycleStatistics operator+(const CycleStatistics& a, const CycleStatistics& b);

    double mean_work() const;
    double work_standard_error() const;
    double success_fraction() const;
    double mean_info_consumed() const;
    double mean_erasure_cost() const;
};

// Cycle i uses TrajectoryRng(seed, i). Bit-identical for any thread count.
CycleStatistics run_cycles(const EngineParams& p, const FeedbackPolicy& policy, std::uint64_t cycles,
                           std::uint64_t seed, unsigned threads, double t_bath = 0.0);

// Mean work of a policy from the outcome probabilities (no sampling).
double mean_work(const EngineParams& p, const FeedbackPolicy& policy);

struct ConversionRatio {
    double eta;         // clamped to >= 0
    double eta_raw;     // mean work / E^meas
    double delta_info;  // consumed mutual information, bits
    bool black_region;  // no net work extracted (eta_raw <= 0)
};

// Throws ParameterError when E^meas = 0.
ConversionRatio conversion_ratio(const EngineParams& p, const FeedbackPolicy& policy);

// <H_2qb>, <H_loc>, <V>, populations and Bloch coordinates along the
// numerically propagated stroke from |10>, `samples` points on [0, t_end].
TimeSeries engine_trace(const EngineParams& p, std::size_t samples, double t_end);

struct SweepRow {
    double delta;
    double g;
    double e_meas;
    double s_meas;
    double t_meas;  // +inf where S^meas = 0
    double eta_ideal;
    double eta_blind;
    double eta_partial;
    double delta_info;
};

// Every (delta, g) pair, delta varying fastest within each g.
std::vector<SweepRow> engine_sweep(const std::vector<double>& deltas, const std::vector<double>& gs,
                                   double omega_a, double read_fraction);

}  // namespace qfuel::engine2q
