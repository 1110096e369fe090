#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsusy/approx.hpp"
#include "tsusy/config.hpp"
#include "tsusy/dynamics.hpp"
#include "tsusy/io.hpp"
#include "tsusy/operators.hpp"
#include "tsusy/oscillation.hpp"
#include "tsusy/spatial.hpp"
#include "tsusy/units.hpp"

namespace tsusy {

using json = nlohmann::json;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int numerical = 3;
inline constexpr int io = 4;
} // namespace exit_code

inline int exit_code_for(const Error& e) {
    if (e.kind() == ErrorKind::Io) return exit_code::io;
    return e.is_numerical() ? exit_code::numerical : exit_code::config;
}

inline const char* to_string(EnergyFrame f) {
    switch (f) {
    case EnergyFrame::Physical: return "physical";
    case EnergyFrame::Wick: return "wick";
    case EnergyFrame::Oscillation: return "oscillation";
    }
    return "?";
}

struct ScenarioResult {
    RunConfig config;
    std::vector<double> times, mass, w_plus, w_minus;
    std::vector<cplx> E_plus, E_minus;
    EnergyFrame frame = EnergyFrame::Physical;
    OscillationResult oscillation;
    std::string producer;
    std::optional<ode::Stats> stats;
    double norm_drift = std::numeric_limits<double>::quiet_NaN();
    std::vector<TimeInterval> poles;
    double peak_probability = 0.0, peak_time = 0.0;

    static std::vector<std::string> columns() {
        return {"t", "m", "W_plus", "W_minus", "ReE_plus", "ImE_plus", "ReE_minus", "ImE_minus",
                "alpha", "beta", "rho", "P"};
    }

    io::Table table() const {
        io::Table t;
        t.header = columns();
        const auto& o = oscillation;
        for (std::size_t i = 0; i < times.size(); ++i)
            t.rows.push_back({times[i], mass[i], w_plus[i], w_minus[i], E_plus[i].real(), E_plus[i].imag(),
                              E_minus[i].real(), E_minus[i].imag(), o.alpha[i], o.beta[i], o.rho[i],
                              o.probability[i]});
        return t;
    }

    json to_json() const {
        const auto& c = config;
        json meta = {
            {"scenario", c.scenario},
            {"profile", c.profile_spec},
            {"k", c.k},
            {"theta", c.theta},
            {"sin2_2theta", MixingConfig{c.theta}.sin2_2theta()},
            {"convention", to_string(c.convention)},
            {"ic_mode", to_string(c.ic_mode)},
            {"t0", c.t0},
            {"t1", c.t1},
            {"samples", c.samples},
            {"rel_tol", c.rel_tol},
            {"abs_tol", c.abs_tol},
            {"probability_source", c.probability_source()},
            {"producer", producer},
            {"energy_frame", to_string(frame)},
            {"applicable", oscillation.applicable},
            {"exceeds_unity", oscillation.exceeds_unity},
            {"peak_P", peak_probability},
            {"t_peak", peak_time},
        };
        json validity = json::array();
        for (const auto& v : oscillation.validity) validity.push_back({{"name", v.name}, {"value", v.value}});
        meta["validity"] = validity;
        json diag = json::object();
        if (stats) {
            diag["accepted_steps"] = stats->accepted;
            diag["rejected_steps"] = stats->rejected;
            diag["rhs_evaluations"] = stats->rhs_evals;
        }
        if (std::isfinite(norm_drift)) diag["norm_drift"] = norm_drift;
        json poles_json = json::array();
        for (const auto& p : poles) poles_json.push_back({p.lo, p.hi});
        diag["pole_intervals"] = poles_json;
        meta["diagnostics"] = diag;

        json series = json::object();
        const auto t = table();
        for (std::size_t c2 = 0; c2 < t.header.size(); ++c2) {
            json col = json::array();
            for (const auto& row : t.rows) col.push_back(row[c2]);
            series[t.header[c2]] = col;
        }
        return {{"metadata", meta}, {"series", series}};
    }

    std::string summary() const {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s: peak P = %.10g at t = %.10g (%s)", config.scenario.c_str(),
                      peak_probability, peak_time, config.probability_source().c_str());
        return buf;
    }
};

namespace detail {

inline void fill_profile_columns(ScenarioResult& r) {
    for (double t : r.times) {
        const auto s = evaluate_profile(r.config.profile, t);
        const auto w = superpotentials(r.config.profile, t);
        r.mass.push_back(s.mass);
        r.w_plus.push_back(w.w_plus);
        r.w_minus.push_back(w.w_minus);
    }
}

// Samples this close (relative) to the maximum count as the peak; the earliest one wins,
// so repeated maxima of a periodic P do not flip on round-off.
inline constexpr double peak_band = 1e-7;

inline void find_peak(ScenarioResult& r) {
    double best = -INFINITY;
    for (double p : r.oscillation.probability)
        if (std::isfinite(p)) best = std::max(best, p);
    r.peak_probability = std::numeric_limits<double>::quiet_NaN();
    r.peak_time = std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(best)) return;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        const double p = r.oscillation.probability[i];
        if (std::isfinite(p) && p >= best - peak_band * std::abs(best)) {
            r.peak_probability = p;
            r.peak_time = r.times[i];
            return;
        }
    }
}

} // namespace detail

/// Computes one scenario. Writes nothing.
inline ScenarioResult run_scenario(const RunConfig& rc) {
    ScenarioResult r;
    r.config = rc;
    const auto p = rc.params();
    p.validate();
    r.times = p.sample_times();
    detail::fill_profile_columns(r);

    if (!rc.closed_form) {
        p.require_integrable();
        ModeTrajectory tr;
        switch (rc.route) {
        case Route::Coupled: tr = solve_coupled(p); break;
        case Route::Riccati: {
            const auto psi0 = initial_psi(p);
            const double m = evaluate_profile(p.profile, p.t0).mass;
            tr = solve_riccati(p, energies_from_psi(p.convention, m, p.k, psi0.plus, psi0.minus, p.energy_scale()),
                               psi0);
            break;
        }
        case Route::SecondOrder: tr = solve_second_order(p, lifted_initial_conditions(p)); break;
        }
        r.E_plus = tr.E_plus;
        r.E_minus = tr.E_minus;
        r.frame = frame_of(rc.convention);
        r.producer = to_string(tr.producer);
        r.stats = tr.stats;
        if (rc.convention == Convention::Physical && rc.ic_mode == IcMode::UnitPair) r.norm_drift = tr.norm_drift();
        r.poles = tr.pole_intervals;
        r.oscillation = probability_from_trajectory(rc.theta, tr);
    } else {
        r.producer = to_string(Producer::ClosedForm);
        const auto mode = *rc.closed_form;
        if (mode == ClosedFormMode::Massive) {
            const auto lim = limit_E_massive(rc.profile, r.times, rc.convention, rc.k);
            r.E_plus = lim.E_plus;
            r.E_minus = lim.E_minus;
            r.frame = lim.frame;
            r.oscillation = probability_massive(rc.theta, rc.profile, r.times, rc.t0, rc.k);
        } else {
            const double m0 = rc.profile.m0(), lambda = rc.profile.lambda();
            const auto lim = limit_E_ur_sinusoidal(m0, lambda, rc.k, r.times);
            r.E_plus = lim.E_plus;
            r.E_minus = lim.E_minus;
            r.frame = lim.frame;
            r.oscillation = probability_closed_form(mode, rc.theta, {rc.profile, m0, lambda, rc.k}, r.times);
        }
    }
    detail::find_peak(r);
    return r;
}

inline std::string render(const ScenarioResult& r, OutputFormat format) {
    return format == OutputFormat::Csv ? io::to_csv(r.table()) : r.to_json().dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Sweeps: every bracketed list in the config is an axis. Rows follow the
// lexicographic order of the axis index tuple, axes sorted by key name.

inline constexpr std::size_t max_sweep_rows = 1000000;

struct SweepRow {
    std::vector<std::string> values;
    std::string status = "ok";
    std::string message;
    double peak_P = NAN, t_peak = NAN, alpha_end = NAN, beta_end = NAN, rho_end = NAN;
};

struct SweepResult {
    std::vector<std::string> axes;
    std::vector<SweepRow> rows;

    bool any_success() const {
        for (const auto& r : rows)
            if (r.status == "ok") return true;
        return false;
    }
};

struct SweepPlan {
    ConfigFile base;
    std::vector<std::string> axes;
    std::vector<std::vector<std::string>> values;
    std::size_t rows = 1;
};

/// Keys that describe the sweep's own output rather than a scenario.
inline bool is_sweep_output_key(const std::string& key) {
    return key == "output" || key == "format" || key == "svg" || key == "parallelism";
}

inline SweepPlan plan_sweep(const ConfigFile& cfg) {
    SweepPlan plan;
    plan.base = cfg;
    for (const auto& key : cfg.list_keys()) {
        if (is_sweep_output_key(key)) throw Error(ErrorKind::Config, "'" + key + "' cannot be swept");
        plan.axes.push_back(key);
        plan.values.push_back(ConfigFile::list_items(cfg.entries().at(key)));
        plan.rows *= plan.values.back().size();
        if (plan.rows > max_sweep_rows) throw Error(ErrorKind::Config, "sweep has more than 1e6 rows");
    }
    return plan;
}

inline SweepRow run_sweep_row(const SweepPlan& plan, std::size_t index) {
    SweepRow row;
    ConfigFile cfg;
    {
        ConfigFile copy = plan.base;
        std::vector<std::size_t> idx(plan.axes.size());
        std::size_t rest = index;
        for (std::size_t a = plan.axes.size(); a-- > 0;) {
            idx[a] = rest % plan.values[a].size();
            rest /= plan.values[a].size();
        }
        for (std::size_t a = 0; a < plan.axes.size(); ++a) {
            row.values.push_back(plan.values[a][idx[a]]);
            copy.set(plan.axes[a], plan.values[a][idx[a]]);
        }
        cfg = ConfigFile::parse("", plan.base.base_dir());
        for (const auto& [key, value] : copy.entries())
            if (!is_sweep_output_key(key)) cfg.set(key, value);
    }
    try {
        const auto result = run_scenario(run_config_from(cfg));
        row.peak_P = result.peak_probability;
        row.t_peak = result.peak_time;
        row.alpha_end = result.oscillation.alpha.back();
        row.beta_end = result.oscillation.beta.back();
        row.rho_end = result.oscillation.rho.back();
    } catch (const Error& e) {
        const int code = exit_code_for(e);
        row.status = code == exit_code::numerical ? "numerical_error" : code == exit_code::io ? "io_error" : "config_error";
        row.message = e.what();
    } catch (const std::exception& e) {
        row.status = "numerical_error";
        row.message = e.what();
    }
    return row;
}

/// Rows run on a pool of `parallelism` workers; results land in their own
/// slots, so the output does not depend on scheduling.
inline SweepResult run_sweep(const SweepPlan& plan, std::size_t parallelism) {
    if (parallelism == 0) throw Error(ErrorKind::Config, "parallelism must be >= 1");
    SweepResult out;
    out.axes = plan.axes;
    out.rows.resize(plan.rows);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < plan.rows; i = next++) out.rows[i] = run_sweep_row(plan, i);
    };
    const std::size_t n = std::min(parallelism, plan.rows);
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n);
        for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

inline std::string sweep_csv(const SweepResult& s) {
    std::string out = "index";
    for (const auto& a : s.axes) out += "," + io::csv_field(a);
    out += ",status,peak_P,t_peak,alpha_end,beta_end,rho_end\n";
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        const auto& r = s.rows[i];
        out += std::to_string(i);
        for (const auto& v : r.values) out += "," + io::csv_field(v);
        out += "," + r.status;
        for (double x : {r.peak_P, r.t_peak, r.alpha_end, r.beta_end, r.rho_end}) out += "," + io::format_double(x);
        out += "\n";
    }
    return out;
}

inline json sweep_json(const SweepResult& s) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        const auto& r = s.rows[i];
        json params = json::object();
        for (std::size_t a = 0; a < s.axes.size(); ++a) params[s.axes[a]] = r.values[a];
        json row = {{"index", i}, {"parameters", params}, {"status", r.status}, {"peak_P", r.peak_P},
                    {"t_peak", r.t_peak}, {"alpha_end", r.alpha_end}, {"beta_end", r.beta_end},
                    {"rho_end", r.rho_end}};
        if (!r.message.empty()) row["message"] = r.message;
        rows.push_back(row);
    }
    return {{"axes", s.axes}, {"rows", rows}};
}

// ---------------------------------------------------------------------------

inline json algebra_report(const AlgebraConfig& ac) {
    const TimeGrid grid(ac.t0, ac.t1, ac.points);
    const auto [q_plus, q_minus] = build_charge_operators(grid, ac.profile, ac.scheme);
    const auto r = algebra_residuals(q_plus, q_minus);
    const double anti = r.anticommutator_residual / r.h_norm;
    const double comm = r.commutator_residual / (r.h_norm * r.q_norm);
    const double nil = r.nilpotency_residual;

    std::vector<double> spacing, error;
    std::size_t n = ac.points;
    for (std::size_t i = 0; i < ac.refinements; ++i, n = 2 * n - 1) {
        const TimeGrid g(ac.t0, ac.t1, n);
        spacing.push_back(g.spacing());
        error.push_back(hamiltonian_consistency_error(g, ac.profile, ac.scheme, [](double t) { return std::sin(t); }));
    }
    const double order = observed_order(spacing, error);
    const double required = ac.scheme == Scheme::Forward ? 1.0 : 2.0;
    return {
        {"profile", ac.profile_spec},
        {"grid", {{"t0", ac.t0}, {"t1", ac.t1}, {"points", ac.points}}},
        {"scheme", ac.scheme == Scheme::Forward ? "forward" : "central"},
        {"anticommutator_residual", r.anticommutator_residual},
        {"commutator_residual", r.commutator_residual},
        {"nilpotency_residual", r.nilpotency_residual},
        {"h_norm", r.h_norm},
        {"q_norm", r.q_norm},
        {"relative", {{"anticommutator", anti}, {"commutator", comm}, {"nilpotency", nil}}},
        {"algebra_pass", anti <= 1e-12 && comm <= 1e-12 && nil == 0.0},
        {"consistency", {{"spacing", spacing}, {"error", error}, {"observed_order", order},
                         {"required_order", required}, {"pass", order >= (ac.scheme == Scheme::Forward ? 0.95 : 1.95)}}},
    };
}

inline json ansatz_report(const AnsatzConfig& ac) {
    const auto& a = ac.ansatz;
    const auto r = ansatz_residual(a);
    json rep = {
        {"k1", a.k1},
        {"k2", a.k2},
        {"k", a.k()},
        {"f", ac.f_spec},
        {"derivatives", a.derivatives == Derivatives::Analytic ? "analytic" : "finite_difference"},
        {"region", {{"lo", a.region.lo}, {"hi", a.region.hi}, {"n", a.region.n}}},
        {"residual_plus", r.residual_plus},
        {"residual_minus", r.residual_minus},
    };
    // The identity is only expected to hold without the x^2 phase.
    if (a.k2 == 0.0) rep["identity_pass"] = r.worst() <= 1e-8;
    else rep["identity_pass"] = nullptr;
    if (a.derivatives == Derivatives::FiniteDifference && ac.refine.size() >= 2) {
        const auto study = ansatz_refinement(a, ac.refine);
        json res = json::array();
        for (const auto& x : study.residuals) res.push_back(x.worst());
        rep["refinement"] = {{"samples", study.samples}, {"spacing", study.spacing}, {"residual", res},
                             {"observed_order", study.order}};
    }
    return rep;
}

// ---------------------------------------------------------------------------

/// MeV neutrinos with a sinusoidal mass: Lambda = delta_m2 / k.
struct NeutrinoPreset {
    double k = 1e6;
    double m0 = 1e-1;
    double delta_m2 = 1e-4;
    double sin2_2theta = 1.0;

    double lambda() const { return delta_m2 / k; }
};

inline RunConfig neutrino_run_config(const NeutrinoPreset& n, ClosedFormMode mode = ClosedFormMode::URReduced,
                                     std::size_t samples = 1001) {
    RunConfig rc;
    rc.scenario = "neutrino";
    char spec[96];
    std::snprintf(spec, sizeof spec, "sinusoidal(%.17g, %.17g)", n.m0, n.lambda());
    rc.profile_spec = spec;
    rc.profile = MassProfile::sinusoidal(n.m0, n.lambda());
    rc.k = n.k;
    rc.theta = MixingConfig::from_sin2_2theta(n.sin2_2theta).theta;
    rc.t0 = 0.0;
    rc.t1 = std::numbers::pi / n.lambda();
    rc.samples = samples;
    rc.closed_form = mode;
    return rc;
}

inline std::string neutrino_summary(const NeutrinoPreset& n, const ScenarioResult& r) {
    char buf[384];
    const double scaled = n.sin2_2theta > 0 ? r.peak_probability / n.sin2_2theta : NAN;
    std::snprintf(buf, sizeof buf,
                  "neutrino: peak P/sin^2(2theta) = %.10g at Lambda t = %.10g; max distance pi hbar c / Lambda = %.6g m",
                  scaled, r.peak_time * n.lambda(), units::max_travel_distance_m(n.lambda()));
    return buf;
}

} // namespace tsusy
