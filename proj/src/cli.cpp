#include "qfuel/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "qfuel/chain.hpp"
#include "qfuel/csv.hpp"
#include "qfuel/engine2q.hpp"
#include "qfuel/errors.hpp"
#include "qfuel/meter.hpp"
#include "qfuel/parallel.hpp"

#ifndef QFUEL_VERSION
#define QFUEL_VERSION "0.0.0"
#endif

namespace qfuel::cli {

namespace {

// Bad flags or flag combinations; maps to exit code 2.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Options {
    // shared
    std::uint64_t seed = 0;
    std::string output;
    bool force = false;
    unsigned threads = default_thread_count();
    double omega_a = 1.0;
    // engine
    double delta = 1.0;
    std::optional<double> g;
    std::size_t samples = 401;
    std::vector<double> g_values{0.5, 1.0, 2.0};
    double delta_min = 0.01;
    double delta_max = 4.0;
    std::size_t delta_points = 400;
    double read_fraction = 1.0;
    std::string policy = "ideal";
    std::uint64_t trajectories = 0;
    double t_bath = 0.0;
    // chain
    std::vector<int> n_values;
    std::vector<double> ratios;
    // meter
    std::optional<double> chi;
    std::vector<double> chi_over_omega;
    std::optional<double> dt;
    bool literal_coupling = false;
};

// Resolved configuration of one invocation: subcommand plus every parameter
// that influences the output, in header order.
struct RunConfig {
    std::string subcommand;
    KeyValues params;

    void set(std::string key, const std::string& value) { params.emplace_back(std::move(key), value); }
    void set(std::string key, double value) { set(std::move(key), format_number(value)); }
    void set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }

    KeyValues header() const {
        KeyValues h{{"qfuel", version()}, {"subcommand", subcommand}};
        h.insert(h.end(), params.begin(), params.end());
        return h;
    }
};

template <class T>
std::string join(const std::vector<T>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ' ';
        if constexpr (std::is_floating_point_v<T>) {
            s += format_number(values[i]);
        } else {
            s += std::to_string(values[i]);
        }
    }
    return s;
}

double coupling_or_delta(const Options& o) { return o.g.value_or(o.delta); }

meter::ReadoutConvention convention(const Options& o) {
    return o.literal_coupling ? meter::ReadoutConvention::Literal : meter::ReadoutConvention::HalfChi;
}

std::string convention_name(const Options& o) { return o.literal_coupling ? "literal" : "half-chi"; }

CsvTable engine_trace(const Options& o, RunConfig& cfg) {
    const engine2q::EngineParams p(o.omega_a, o.delta, coupling_or_delta(o));
    cfg.set("omega_a", p.omega_a());
    cfg.set("delta", p.delta());
    cfg.set("g", p.g());
    cfg.set("samples", static_cast<std::uint64_t>(o.samples));
    cfg.set("seed", o.seed);
    const double t_end = 2.0 * p.t0();
    const TimeSeries ts = engine2q::engine_trace(p, o.samples, t_end);

    std::vector<std::string> columns{"t"};
    for (const auto& [name, values] : ts.channels()) columns.push_back(name);
    CsvTable table(columns);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        std::vector<double> row{ts.times()[k]};
        for (const auto& [name, values] : ts.channels()) row.push_back(values[k]);
        table.add_row(std::move(row));
    }
    return table;
}

CsvTable engine_sweep(const Options& o, RunConfig& cfg) {
    if (o.delta_points < 1) throw UsageError("engine-sweep: --delta-points must be >= 1");
    if (o.g_values.empty()) throw UsageError("engine-sweep: empty --g-values grid");
    if (o.delta_points > 1 && !(o.delta_max > o.delta_min)) {
        throw UsageError("engine-sweep: --delta-max must exceed --delta-min");
    }
    std::vector<double> deltas(o.delta_points);
    for (std::size_t i = 0; i < o.delta_points; ++i) {
        deltas[i] = o.delta_points == 1 ? o.delta_min
                                        : o.delta_min + (o.delta_max - o.delta_min) * static_cast<double>(i) /
                                                            static_cast<double>(o.delta_points - 1);
    }
    cfg.set("omega_a", o.omega_a);
    cfg.set("delta_min", o.delta_min);
    cfg.set("delta_max", o.delta_max);
    cfg.set("delta_points", static_cast<std::uint64_t>(o.delta_points));
    cfg.set("g_values", join(o.g_values));
    cfg.set("read_fraction", o.read_fraction);
    cfg.set("seed", o.seed);

    const auto rows = engine2q::engine_sweep(deltas, o.g_values, o.omega_a, o.read_fraction);
    CsvTable table({"delta", "g", "E_meas", "S_meas", "T_meas", "eta_ideal", "eta_blind", "delta_info",
                    "eta_partial"});
    for (const auto& r : rows) {
        table.add_row({r.delta, r.g, r.e_meas, r.s_meas, r.t_meas, r.eta_ideal, r.eta_blind, r.delta_info,
                       r.eta_partial});
    }
    return table;
}

engine2q::FeedbackPolicy parse_policy(const Options& o) {
    if (o.policy == "ideal") return engine2q::FeedbackPolicy::ideal();
    if (o.policy == "blind") return engine2q::FeedbackPolicy::blind();
    return engine2q::FeedbackPolicy::partial(o.read_fraction);
}

CsvTable cycle_mc(const Options& o, RunConfig& cfg) {
    const engine2q::EngineParams p(o.omega_a, o.delta, coupling_or_delta(o));
    const engine2q::FeedbackPolicy policy = parse_policy(o);
    const std::uint64_t n = o.trajectories ? o.trajectories : 100000;
    cfg.set("omega_a", p.omega_a());
    cfg.set("delta", p.delta());
    cfg.set("g", p.g());
    cfg.set("policy", engine2q::to_string(policy.mode));
    cfg.set("read_fraction", policy.effective_read_fraction());
    cfg.set("t_bath", o.t_bath);
    cfg.set("trajectories", n);
    cfg.set("seed", o.seed);

    const auto stats = engine2q::run_cycles(p, policy, n, o.seed, o.threads, o.t_bath);
    const double e_meas = engine2q::measurement_energy(p);
    const double eta_analytic = e_meas > 0.0 ? engine2q::conversion_ratio(p, policy).eta_raw : std::nan("");
    CsvTable table({"trajectories", "mean_work", "work_stderr", "E_meas", "eta_mc", "eta_analytic",
                    "success_fraction", "mean_info_consumed", "S_meas", "resets", "mean_reset_energy",
                    "mean_erasure_cost"});
    const double cycles = static_cast<double>(stats.cycles);
    table.add_row({cycles, stats.mean_work(), stats.work_standard_error(), e_meas,
                   e_meas > 0.0 ? stats.mean_work() / e_meas : std::nan(""), eta_analytic, stats.success_fraction(),
                   stats.mean_info_consumed(), engine2q::measurement_entropy(p), static_cast<double>(stats.resets),
                   stats.reset_energy_sum / cycles, stats.mean_erasure_cost()});
    return table;
}

CsvTable chain_table(const Options& o, RunConfig& cfg, bool monte_carlo) {
    std::vector<int> ns = o.n_values;
    std::vector<double> ratios = o.ratios;
    if (ns.empty()) ns = monte_carlo ? std::vector<int>{2, 3, 5, 10} : std::vector<int>{2, 3, 5, 10, 20, 50, 100};
    if (ratios.empty()) ratios = monte_carlo ? std::vector<double>{0.5, 1.0, 2.0} : std::vector<double>{0.25, 0.5, 1.0, 2.0};
    for (int n : ns) {
        if (n < 2) throw UsageError("chain: every --n-values entry must be >= 2, got " + std::to_string(n));
    }
    for (double r : ratios) {
        if (!(r > 0.0)) throw UsageError("chain: every --ratios entry must be > 0");
    }
    chain::SweepOptions so;
    so.omega_a = o.omega_a;
    so.delta = o.delta;
    so.trajectories = monte_carlo ? (o.trajectories ? o.trajectories : 100000) : o.trajectories;
    so.seed = o.seed;
    so.threads = o.threads;
    cfg.set("omega_a", so.omega_a);
    cfg.set("delta", so.delta);
    cfg.set("n_values", join(ns));
    cfg.set("ratios", join(ratios));
    cfg.set("trajectories", so.trajectories);
    cfg.set("seed", so.seed);

    const auto rows = chain::sweep_chain(ns, ratios, so);
    const bool with_mc = so.trajectories > 0;
    std::vector<std::string> columns{"n", "g_over_delta", "p_analytic"};
    if (with_mc) {
        for (const char* c : {"p_mc", "p_mc_stderr", "z_score", "mean_hops", "mean_energy_gain", "trajectories"}) {
            columns.emplace_back(c);
        }
    }
    CsvTable table(columns);
    for (const auto& r : rows) {
        std::vector<double> row{static_cast<double>(r.n), r.g_over_delta, r.analytic};
        if (with_mc) {
            const auto& mc = *r.monte_carlo;
            const double sigma = std::sqrt(r.analytic * (1.0 - r.analytic) / static_cast<double>(mc.runs));
            row.push_back(mc.frequency());
            row.push_back(mc.standard_error());
            row.push_back(sigma > 0.0 ? (mc.frequency() - r.analytic) / sigma : 0.0);
            row.push_back(mc.mean_hops());
            row.push_back(mc.mean_energy_gain());
            row.push_back(static_cast<double>(mc.runs));
        }
        table.add_row(std::move(row));
    }
    return table;
}

meter::MeterParams meter_params(const Options& o, double chi_over_omega, std::ostream& err) {
    const engine2q::EngineParams e(o.omega_a, o.delta, coupling_or_delta(o));
    const double chi = o.chi.value_or(chi_over_omega * e.rabi_frequency());
    meter::MeterParams p = o.dt ? meter::MeterParams::with_step(e, chi, *o.dt, convention(o))
                                : meter::MeterParams(e, chi, o.samples, convention(o));
    if (p.outside_perturbative_regime()) {
        err << "warning: epsilon = g/chi = " << format_number(p.epsilon()) << " > " << meter::kEpsilonWarning
            << "; first-order predictions are only indicative\n";
    }
    return p;
}

CsvTable meter_trace(const Options& o, RunConfig& cfg, std::ostream& err) {
    const double ratio = o.chi_over_omega.empty() ? 10.0 : o.chi_over_omega.front();
    const meter::MeterParams p = meter_params(o, ratio, err);
    cfg.set("omega_a", p.engine().omega_a());
    cfg.set("delta", p.engine().delta());
    cfg.set("g", p.engine().g());
    cfg.set("chi", p.chi());
    cfg.set("epsilon", p.epsilon());
    cfg.set("coupling_convention", convention_name(o));
    cfg.set("samples", static_cast<std::uint64_t>(p.samples()));
    cfg.set("dt", p.dt());
    cfg.set("t0", p.t0());
    cfg.set("t_m", p.t_m());
    cfg.set("seed", o.seed);

    const auto run = meter::simulate_premeasurement(p);
    const TimeSeries& ts = run.series;
    std::vector<std::string> columns{"t"};
    for (const auto& [name, values] : ts.channels()) columns.push_back(name);
    columns.emplace_back("p_sum");
    CsvTable table(columns);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        std::vector<double> row{ts.times()[k]};
        for (const auto& [name, values] : ts.channels()) row.push_back(values[k]);
        row.push_back(ts.channel("p_100")[k] + ts.channel("p_101")[k] + ts.channel("p_010")[k] +
                      ts.channel("p_011")[k]);
        table.add_row(std::move(row));
    }
    table.add_footer("switch_off_cost=" + format_number(meter::switch_off_cost(run)));
    table.add_footer("E_meas=" + format_number(engine2q::measurement_energy(p.engine())));
    return table;
}

CsvTable meter_convergence(const Options& o, RunConfig& cfg, std::ostream& err) {
    if (o.chi) throw UsageError("meter-convergence takes --chi-over-omega, not --chi");
    if (o.dt) throw UsageError("meter-convergence takes --samples, not --dt");
    const std::vector<double> ratios = o.chi_over_omega.empty() ? std::vector<double>{10, 20, 40, 80} : o.chi_over_omega;
    if (ratios.size() < 2) throw UsageError("meter-convergence needs at least two --chi-over-omega values");
    for (double r : ratios) meter_params(o, r, err);

    const engine2q::EngineParams e(o.omega_a, o.delta, coupling_or_delta(o));
    cfg.set("omega_a", e.omega_a());
    cfg.set("delta", e.delta());
    cfg.set("g", e.g());
    cfg.set("chi_over_omega", join(ratios));
    cfg.set("coupling_convention", convention_name(o));
    cfg.set("samples", static_cast<std::uint64_t>(o.samples));
    cfg.set("seed", o.seed);

    const auto points = meter::convergence_study(e, ratios, o.samples, o.threads, convention(o));
    CsvTable table({"chi_over_omega", "chi", "epsilon", "population_deviation", "energy_deviation", "infidelity",
                    "switch_off_cost", "switch_off_gap", "h_loc_drift"});
    std::vector<double> eps, pop, energy, infid;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& c = points[i];
        table.add_row({ratios[i], c.chi, c.epsilon, c.population_deviation, c.energy_deviation, c.infidelity,
                       c.switch_off_cost, c.switch_off_gap, c.h_loc_drift});
        eps.push_back(c.epsilon);
        pop.push_back(c.population_deviation);
        energy.push_back(c.energy_deviation);
        infid.push_back(c.infidelity);
    }
    table.add_footer("population_order=" + format_number(meter::fit_order(eps, pop)));
    table.add_footer("energy_order=" + format_number(meter::fit_order(eps, energy)));
    table.add_footer("infidelity_order=" + format_number(meter::fit_order(eps, infid)));
    return table;
}

void add_shared(CLI::App* sub, Options& o) {
    sub->add_option("--seed", o.seed, "Master seed for every random draw")->capture_default_str();
    sub->add_option("-o,--output", o.output, "Write CSV to this file instead of standard output");
    sub->add_flag("--force", o.force, "Overwrite an existing output file");
    sub->add_option("--threads", o.threads, "Worker threads (1 forces sequential execution)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--omega-a", o.omega_a, "Frequency of qubit A; sets the energy unit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

void add_engine(CLI::App* sub, Options& o) {
    sub->add_option("--delta", o.delta, "Detuning omega_b - omega_a")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--g", o.g, "Qubit-qubit coupling (default: equal to delta)")->check(CLI::PositiveNumber);
}

}  // namespace

const char* version() { return QFUEL_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Measurement-fueled two-qubit engine, up-conversion chain and meter dynamics"};
    app.name("qfuel");
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1, 1);

    auto* trace = app.add_subcommand("engine-trace", "Energy components along the entangling stroke");
    add_shared(trace, o);
    add_engine(trace, o);
    trace->add_option("--samples", o.samples, "Samples on [0, 2 pi/Omega]")
        ->check(CLI::Range(std::size_t{200}, std::size_t{10000000}))
        ->capture_default_str();

    auto* sweep = app.add_subcommand("engine-sweep", "Measurement energy, entropy and conversion ratios on a grid");
    add_shared(sweep, o);
    sweep->add_option("--g-values", o.g_values, "Couplings to sweep")->check(CLI::PositiveNumber);
    sweep->add_option("--delta-min", o.delta_min)->capture_default_str();
    sweep->add_option("--delta-max", o.delta_max)->capture_default_str();
    sweep->add_option("--delta-points", o.delta_points)->capture_default_str();
    sweep->add_option("--read-fraction", o.read_fraction, "Memory read probability of the partial policy")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    auto* cycles = app.add_subcommand("cycle-mc", "Monte Carlo engine cycles under a feedback policy");
    add_shared(cycles, o);
    add_engine(cycles, o);
    cycles->add_option("--policy", o.policy)->check(CLI::IsMember({"ideal", "blind", "partial"}))->capture_default_str();
    cycles->add_option("--read-fraction", o.read_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cycles->add_option("--trajectories", o.trajectories, "Number of cycles (default 100000)")->check(CLI::PositiveNumber);
    cycles->add_option("--t-bath", o.t_bath, "Memory erasure bath temperature (k_B = 1)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    auto* csweep = app.add_subcommand("chain-sweep", "Analytic up-conversion success probabilities");
    auto* cmc = app.add_subcommand("chain-mc", "Monte Carlo up-conversion runs against the analytic value");
    for (auto* sub : {csweep, cmc}) {
        add_shared(sub, o);
        sub->add_option("--delta", o.delta, "Total detuning across the chain")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--n-values", o.n_values, "Chain lengths N");
        sub->add_option("--ratios", o.ratios, "Values of g/delta");
        sub->add_option("--trajectories", o.trajectories, "Monte Carlo runs per cell");
    }

    auto* mtrace = app.add_subcommand("meter-trace", "Pre-measurement populations and energy channels");
    auto* mconv = app.add_subcommand("meter-convergence", "Exact vs perturbative deviations over chi");
    for (auto* sub : {mtrace, mconv}) {
        add_shared(sub, o);
        add_engine(sub, o);
        sub->add_option("--chi-over-omega", o.chi_over_omega, "Measurement strength in units of Omega (default 10)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--samples", o.samples, "Samples on [t0, t_m]")->capture_default_str();
        sub->add_option("--chi", o.chi, "Absolute measurement strength")->check(CLI::PositiveNumber);
        sub->add_option("--dt", o.dt, "Sampling step (overrides --samples)")->check(CLI::PositiveNumber);
        sub->add_flag("--literal-coupling", o.literal_coupling,
                      "Use V_m = chi n_B sigma_x with t_m = t0 + pi/(2 chi)");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    RunConfig cfg;
    try {
        if (!o.output.empty() && std::filesystem::exists(o.output) && !o.force) {
            throw UsageError("refusing to overwrite " + o.output + " (pass --force)");
        }
        CsvTable table({});
        if (trace->parsed()) {
            cfg.subcommand = "engine-trace";
            table = engine_trace(o, cfg);
        } else if (sweep->parsed()) {
            cfg.subcommand = "engine-sweep";
            table = engine_sweep(o, cfg);
        } else if (cycles->parsed()) {
            cfg.subcommand = "cycle-mc";
            table = cycle_mc(o, cfg);
        } else if (csweep->parsed()) {
            cfg.subcommand = "chain-sweep";
            table = chain_table(o, cfg, false);
        } else if (cmc->parsed()) {
            cfg.subcommand = "chain-mc";
            table = chain_table(o, cfg, true);
        } else if (mtrace->parsed()) {
            cfg.subcommand = "meter-trace";
            table = meter_trace(o, cfg, err);
        } else {
            cfg.subcommand = "meter-convergence";
            table = meter_convergence(o, cfg, err);
        }

        std::ostringstream csv;
        table.write(csv, cfg.header());
        if (o.output.empty()) {
            out << csv.str();
        } else {
            std::ofstream file(o.output, std::ios::binary | std::ios::trunc);
            if (!file) throw UsageError("cannot open " + o.output + " for writing");
            file << csv.str();
            if (!file) throw UsageError("failed writing " + o.output);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const qfuel::Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitOk;
}

}  // namespace qfuel::cli
