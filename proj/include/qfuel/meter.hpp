#pragma once

// Pre-measurement of qubit B by a degenerate meter qubit m (site 2).
//
// Between t0 and t_m the pair (A, B) stays coupled while B entangles with the
// meter through V_m = kappa * n_B (x) sigma_x^m. With the default HalfChi
// convention kappa = chi/2, so the meter completes its flip at t_m = t0 + pi/chi.
// Literal uses kappa = chi and t_m = t0 + pi/(2 chi).

#include <cstddef>
#include <vector>

#include "qfuel/engine2q.hpp"
#include "qfuel/hilbert.hpp"
#include "qfuel/timeseries.hpp"

namespace qfuel::meter {

inline constexpr int kSiteMeter = 2;
inline const hilbert::Dims kDims{2, 2, 2};

// Above this epsilon = g/chi the perturbative picture is only indicative.
inline constexpr double kEpsilonWarning = 0.2;
// Above this the run is refused.
inline constexpr double kEpsilonCap = 0.5;

enum class ReadoutConvention { HalfChi, Literal };

class MeterParams {
  public:
    // samples >= 2 points on [t0, t_m]. Throws ParameterError when chi <= 0,
    // epsilon > kEpsilonCap, or the grid step exceeds (2 pi / chi) / 50.
    MeterParams(engine2q::EngineParams engine, double chi, std::size_t samples = 401,
                ReadoutConvention convention = ReadoutConvention::HalfChi);

    // Grid built from a requested step; the step is shrunk so it divides the
    // readout window evenly.
    static MeterParams with_step(engine2q::EngineParams engine, double chi, double dt,
                                 ReadoutConvention convention = ReadoutConvention::HalfChi);

    const engine2q::EngineParams& engine() const { return engine_; }
    double chi() const { return chi_; }
    double epsilon() const { return engine_.g() / chi_; }
    bool outside_perturbative_regime() const { return epsilon() > kEpsilonWarning; }
    ReadoutConvention convention() const { return convention_; }
    // Prefactor kappa of n_B (x) sigma_x^m.
    double coupling() const;
    double readout_duration() const;
    double t0() const { return engine_.t0(); }
    double t_m() const { return t0() + readout_duration(); }
    std::size_t samples() const { return samples_; }
    double dt() const { return readout_duration() / static_cast<double>(samples_ - 1); }
    static double max_step(double chi);

  private:
    engine2q::EngineParams engine_;
    double chi_;
    std::size_t samples_;
    ReadoutConvention convention_;
};

struct MeterOperators {
    hilbert::Operator h_loc;
    hilbert::Operator v;
    hilbert::Operator v_m;
    hilbert::Operator h_2qb;  // h_loc + v
    hilbert::Operator h;      // h_loc + v + v_m
};

MeterOperators build_meter_operators(const MeterParams& p);
hilbert::Operator build_meter_hamiltonian(const MeterParams& p, bool meter_on);

// i (cos(theta) |100> - sin(theta) |010>), meter ready in |0>.
hilbert::StateVector initial_state(const MeterParams& p);

struct PremeasurementRun {
    TimeSeries series;
    std::vector<hilbert::StateVector> states;  // one per sample
};

// Exact propagation under H = H_loc + V + V_m over [t0, t_m]. Channels:
// p_100, p_101, p_010, p_011, e_2qb, e_loc, e_int, e_meter, e_total,
// coherence_ab (|<10| Tr_m rho |01>|), e_int_first_order.
PremeasurementRun simulate_premeasurement(const MeterParams& p);

// Evolution under H^(0) = H_loc + V_m alone; t in [t0, t_m].
hilbert::StateVector zeroth_order_state(const MeterParams& p, double t);

// <Psi^(0)(t)| V |Psi^(0)(t)>, decaying from -E^meas at t0 to 0 at t_m.
double first_order_binding_energy(const MeterParams& p, double t);

// -<V_m(t_m)>: the energy paid when the meter coupling is switched off.
double switch_off_cost(const PremeasurementRun& run);
double switch_off_cost(const MeterParams& p);

struct ConvergencePoint {
    double chi;
    double epsilon;
    double population_deviation;  // max over grid and basis states
    double energy_deviation;      // max |<V> - <V^(1)>| over the grid
    double infidelity;            // max 1 - |<Psi^(0)|Psi>|^2 over the grid
    double switch_off_cost;
    double switch_off_gap;  // |switch_off_cost - E^meas| / E^meas
    double h_loc_drift;     // <H_loc>(t_m) - <H_loc>(t0)
};

ConvergencePoint convergence_point(const MeterParams& p);

// One point per chi = ratio * Omega. Points are independent and computed in
// parallel; results do not depend on the thread count.
std::vector<ConvergencePoint> convergence_study(const engine2q::EngineParams& engine,
                                                const std::vector<double>& chi_over_omega, std::size_t samples,
                                                unsigned threads,
                                                ReadoutConvention convention = ReadoutConvention::HalfChi);

// Least-squares slope of log(y) against log(x).
double fit_order(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qfuel::meter
