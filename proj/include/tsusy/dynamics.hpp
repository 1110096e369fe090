#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tsusy/error.hpp"
#include "tsusy/integrator.hpp"
#include "tsusy/profiles.hpp"

namespace tsusy {

using cplx = std::complex<double>;

enum class Convention { Wick, Physical };
enum class IcMode { UnitPair, PureBranch };
enum class Producer { Coupled, Riccati, SecondOrder, ClosedForm };

inline const char* to_string(Convention c) { return c == Convention::Wick ? "wick" : "physical"; }
inline const char* to_string(IcMode m) { return m == IcMode::UnitPair ? "unit_pair" : "pure_branch"; }

inline const char* to_string(Producer p) {
    switch (p) {
    case Producer::Coupled: return "coupled";
    case Producer::Riccati: return "riccati";
    case Producer::SecondOrder: return "second_order";
    case Producer::ClosedForm: return "closed_form";
    }
    return "?";
}

// More oscillation cycles than this cannot be integrated in reasonable time.
inline constexpr double max_integrable_cycles = 1e7;

struct ScenarioParams {
    MassProfile profile = MassProfile::constant(0.0);
    double k = 0.0;
    Convention convention = Convention::Physical;
    IcMode ic_mode = IcMode::UnitPair;
    double t0 = 0.0;
    double t1 = 1.0;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::size_t max_samples = 1001;

    void validate() const {
        if (!(rel_tol >= 1e-13 && rel_tol <= 1e-3))
            throw Error(ErrorKind::Config, "rel_tol must lie in [1e-13, 1e-3]");
        if (!(abs_tol >= 0.0) || !std::isfinite(abs_tol)) throw Error(ErrorKind::Config, "abs_tol must be >= 0");
        if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorKind::Config, "k must be finite and >= 0");
        if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0))
            throw Error(ErrorKind::Config, "time span must satisfy t_start < t_end");
        if (max_samples < 2) throw Error(ErrorKind::Config, "need at least 2 samples");
        profile.require_in_domain(t0);
        profile.require_in_domain(t1);
    }

    /// Rough count of oscillation cycles an integrator would have to resolve.
    double cycle_estimate() const {
        const double m = profile.mass_scale();
        return std::sqrt(k * k + m * m) * (t1 - t0) / (2 * std::numbers::pi);
    }

    void require_integrable() const {
        if (cycle_estimate() > max_integrable_cycles)
            throw Error(ErrorKind::Hierarchy,
                        "scenario spans ~" + std::to_string(cycle_estimate()) +
                            " oscillation cycles; use the closed-form approximations instead");
    }

    /// Characteristic energy used for relative thresholds.
    double energy_scale() const {
        const double s = std::max(k, profile.mass_scale());
        return s > 0.0 ? s : 1.0;
    }

    std::vector<double> sample_times() const {
        std::vector<double> t(max_samples);
        const double step = (t1 - t0) / static_cast<double>(max_samples - 1);
        for (std::size_t i = 0; i < max_samples; ++i) t[i] = t0 + step * static_cast<double>(i);
        t.back() = t1;
        return t;
    }

    /// Per-step integrator tolerances. Local errors accumulate over many
    /// cycles, so each step is held 100x tighter than the requested accuracy.
    ode::Tolerances tolerances() const {
        return {std::max(0.01 * rel_tol, 1e-15), 0.01 * abs_tol};
    }
};

struct BranchPair {
    cplx plus;
    cplx minus;
};

/// Which relation ties an energy sequence to its mode function:
/// Physical psi = exp(-i int E), Wick psi = exp(-int E), Oscillation psi = exp(+i int E).
/// The probability formulas consume the Oscillation frame.
enum class EnergyFrame { Physical, Wick, Oscillation };

inline EnergyFrame frame_of(Convention c) { return c == Convention::Wick ? EnergyFrame::Wick : EnergyFrame::Physical; }

inline cplx to_oscillation_frame(EnergyFrame frame, cplx E) {
    switch (frame) {
    case EnergyFrame::Physical: return -E;
    case EnergyFrame::Wick: return cplx(0, 1) * E;
    case EnergyFrame::Oscillation: return E;
    }
    return E;
}

inline std::vector<cplx> to_oscillation_frame(EnergyFrame frame, std::vector<cplx> E) {
    for (auto& e : E) e = to_oscillation_frame(frame, e);
    return E;
}

struct ModeTrajectory {
    std::vector<double> times;
    std::vector<cplx> psi_plus, psi_minus;
    std::vector<cplx> E_plus, E_minus;
    Producer producer = Producer::Coupled;
    ScenarioParams params;
    std::vector<TimeInterval> pole_intervals;   // Riccati only: spans integrated in linear form
    ode::Stats stats;

    std::size_t size() const { return times.size(); }

    bool near_pole(double t) const {
        for (const auto& iv : pole_intervals)
            if (iv.contains(t)) return true;
        return false;
    }

    /// sup | |psi+|^2 + |psi-|^2 - 2 |
    double norm_drift() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
            worst = std::max(worst, std::abs(std::norm(psi_plus[i]) + std::norm(psi_minus[i]) - 2.0));
        return worst;
    }
};

namespace detail {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();
inline constexpr double psi_ceiling = 1e300;
inline constexpr double psi_floor = 1e-300;

// Ratio below which psi counts as a zero and E is left undefined.
inline constexpr double zero_ratio = 1e-12;

/// E from psi and psi': i psi'/psi (Physical) or -psi'/psi (Wick).
inline cplx log_derivative(Convention c, cplx psi, cplx dpsi, double scale) {
    if (std::abs(psi) * scale <= zero_ratio * std::abs(dpsi) || psi == 0.0) return {nan, nan};
    return c == Convention::Physical ? cplx(0, 1) * dpsi / psi : -dpsi / psi;
}

/// psi' from the coupled first-order system.
inline BranchPair coupled_derivative(Convention c, double m, double k, cplx psi_plus, cplx psi_minus) {
    const cplx dp = m * psi_plus + k * psi_minus;
    const cplx dm = -m * psi_minus + k * psi_plus;
    if (c == Convention::Physical) return {cplx(0, -1) * dp, cplx(0, -1) * dm};
    return {dp, dm};
}

inline void check_magnitude(double magnitude) {
    if (!(magnitude <= psi_ceiling))
        throw Error(ErrorKind::Underflow, "mode function overflowed past 1e300");
    if (magnitude < psi_floor) throw Error(ErrorKind::Underflow, "mode function underflowed below 1e-300");
}

} // namespace detail

/// psi(t0) for the configured ic_mode.
inline BranchPair initial_psi(const ScenarioParams& p) {
    if (p.ic_mode == IcMode::UnitPair) return {1.0, 1.0};
    const double m = evaluate_profile(p.profile, p.t0).mass;
    const double k = p.k;
    const double E = std::hypot(k, m);
    double ratio;
    if (p.convention == Convention::Physical) {
        // Positive-frequency mode exp(-iEt): psi- = (E - m)/k psi+.
        ratio = m >= 0.0 ? k / (E + m) : (E - m) / k;
    } else {
        // Decaying mode exp(-Et): psi- = -(E + m)/k psi+.
        ratio = m <= 0.0 ? -k / (E - m) : -(E + m) / k;
    }
    if (!std::isfinite(ratio))
        throw Error(ErrorKind::Config, "pure_branch initial condition is singular for k = 0 with this mass");
    return {1.0, ratio};
}

/// E(t0) implied by psi(t0) through the coupled system.
inline BranchPair energies_from_psi(Convention c, double m, double k, cplx psi_plus, cplx psi_minus, double scale) {
    const auto d = detail::coupled_derivative(c, m, k, psi_plus, psi_minus);
    return {detail::log_derivative(c, psi_plus, d.plus, scale), detail::log_derivative(c, psi_minus, d.minus, scale)};
}

namespace detail {

inline void push_coupled_sample(ModeTrajectory& tr, double t, cplx pp, cplx pm) {
    const auto& p = tr.params;
    const double m = evaluate_profile(p.profile, t).mass;
    const auto e = energies_from_psi(p.convention, m, p.k, pp, pm, p.energy_scale());
    tr.times.push_back(t);
    tr.psi_plus.push_back(pp);
    tr.psi_minus.push_back(pm);
    tr.E_plus.push_back(e.plus);
    tr.E_minus.push_back(e.minus);
}

inline ModeTrajectory empty_trajectory(const ScenarioParams& p, Producer producer) {
    ModeTrajectory tr;
    tr.producer = producer;
    tr.params = p;
    tr.times.reserve(p.max_samples);
    return tr;
}

} // namespace detail

/// Route A: the coupled first-order Dirac system. `psi0` overrides the
/// initial state implied by p.ic_mode.
inline ModeTrajectory solve_coupled(const ScenarioParams& p, std::optional<BranchPair> psi0_override = {}) {
    p.validate();
    p.require_integrable();
    auto tr = detail::empty_trajectory(p, Producer::Coupled);
    const auto samples = p.sample_times();
    const auto psi0 = psi0_override ? *psi0_override : initial_psi(p);

    auto rhs = [&p](double t, const ode::State<2>& y, ode::State<2>& dy) {
        const double m = evaluate_profile(p.profile, t).mass;
        const auto d = detail::coupled_derivative(p.convention, m, p.k, y[0], y[1]);
        dy[0] = d.plus;
        dy[1] = d.minus;
    };
    auto sink = [&tr](double t, const ode::State<2>& y) { detail::push_coupled_sample(tr, t, y[0], y[1]); };
    auto guard = [](double, const ode::State<2>& y) {
        detail::check_magnitude(std::max(std::abs(y[0]), std::abs(y[1])));
        return false;
    };

    ode::Dop853<2> solver(p.tolerances());
    std::size_t cursor = 0;
    solver.integrate(rhs, p.t0, ode::State<2>{psi0.plus, psi0.minus}, p.t1, samples, cursor, sink, guard);
    tr.stats = solver.stats();
    return tr;
}

namespace detail {

/// Coefficient c(t) in psi'' = c psi for the given branch (sign = +1 for psi+).
inline cplx second_order_coefficient(Convention c, const MassProfile& profile, double k, double t, int sign) {
    const auto s = evaluate_profile(profile, t);
    if (c == Convention::Physical) return -cplx(k * k + s.mass * s.mass, sign * s.rate);
    // Wick: psi'' = (k^2 - W) psi with W = -sign*rate - m^2.
    return k * k + sign * s.rate + s.mass * s.mass;
}

/// Riccati right-hand side dE/dt for the given branch.
inline cplx riccati_rhs(Convention c, const MassProfile& profile, double k, double t, int sign, cplx E) {
    const auto s = evaluate_profile(profile, t);
    if (c == Convention::Physical) return cplx(0, -1) * (k * k + s.mass * s.mass - E * E) + sign * s.rate;
    return E * E - k * k + (-sign * s.rate - s.mass * s.mass);
}

struct BranchRun {
    std::vector<cplx> psi, E;
    std::vector<TimeInterval> poles;
    ode::Stats stats;
};

inline void accumulate(ode::Stats& into, const ode::Stats& from) {
    into.accepted += from.accepted;
    into.rejected += from.rejected;
    into.rhs_evals += from.rhs_evals;
}

/// One Riccati branch. The state is (E, Phi) with psi = psi0 * exp(-i Phi)
/// (Physical) or psi0 * exp(-Phi) (Wick); near zeros of psi the linear pair
/// (psi, psi') takes over until |E| has come back down.
inline BranchRun riccati_branch(const ScenarioParams& p, int sign, cplx E0, cplx psi0,
                                const std::vector<double>& samples) {
    const Convention conv = p.convention;
    const double scale = p.energy_scale();
    const double enter_linear = 1e6 * scale, leave_linear = 1e2 * scale;
    const cplx mi = conv == Convention::Physical ? cplx(0, -1) : cplx(-1, 0);   // psi'/psi = mi * E

    BranchRun run;
    run.psi.reserve(samples.size());
    run.E.reserve(samples.size());

    auto riccati = [&](double t, const ode::State<2>& y, ode::State<2>& dy) {
        dy[0] = riccati_rhs(conv, p.profile, p.k, t, sign, y[0]);
        dy[1] = y[0];
    };
    auto linear = [&](double t, const ode::State<2>& y, ode::State<2>& dy) {
        dy[0] = y[1];
        dy[1] = second_order_coefficient(conv, p.profile, p.k, t, sign) * y[0];
    };
    auto emit_riccati = [&](double, const ode::State<2>& y) {
        run.E.push_back(y[0]);
        run.psi.push_back(psi0 * std::exp(mi * y[1]));
    };
    auto emit_linear = [&](double, const ode::State<2>& y) {
        run.psi.push_back(y[0]);
        run.E.push_back(log_derivative(conv, y[0], y[1], scale));
    };
    auto too_large = [&](double, const ode::State<2>& y) {
        check_magnitude(std::abs(psi0 * std::exp(mi * y[1])));
        return std::abs(y[0]) > enter_linear;
    };
    auto settled = [&](double, const ode::State<2>& y) {
        check_magnitude(std::abs(y[0]));
        return std::abs(y[1]) < leave_linear * std::abs(y[0]);
    };

    std::size_t cursor = 0;
    double t = p.t0;
    ode::State<2> y{E0, 0.0};
    bool linear_mode = false;
    if (!std::isfinite(E0.real()) || !std::isfinite(E0.imag()) || std::abs(E0) > enter_linear)
        throw Error(ErrorKind::Pole, "Riccati initial value sits at a pole of E");

    while (true) {
        ode::Dop853<2> solver(p.tolerances());
        ode::Segment<2> seg;
        if (!linear_mode) {
            seg = solver.integrate(riccati, t, y, p.t1, samples, cursor, emit_riccati, too_large);
        } else {
            seg = solver.integrate(linear, t, y, p.t1, samples, cursor, emit_linear, settled);
        }
        accumulate(run.stats, solver.stats());
        t = seg.t;
        if (!linear_mode) {
            if (seg.reason == ode::StopReason::Completed) break;
            const cplx psi = psi0 * std::exp(mi * seg.y[1]);
            y = {psi, mi * seg.y[0] * psi};
            run.poles.push_back({t, p.t1});
            linear_mode = true;
        } else {
            if (seg.reason == ode::StopReason::Completed) break;
            run.poles.back().hi = t;
            const cplx ratio = seg.y[0] / psi0;
            y = {log_derivative(conv, seg.y[0], seg.y[1], scale), std::log(ratio) / mi};
            linear_mode = false;
        }
    }
    return run;
}

} // namespace detail

/// Route B: Riccati equations for E+ and E-. psi0 scales the reconstructed
/// mode functions and defaults to the ic_mode values.
inline ModeTrajectory solve_riccati(const ScenarioParams& p, BranchPair E0, std::optional<BranchPair> psi0 = {}) {
    p.validate();
    p.require_integrable();
    BranchPair base = psi0 ? *psi0 : initial_psi(p);
    if (base.plus == 0.0) base.plus = 1.0;
    if (base.minus == 0.0) base.minus = 1.0;

    auto tr = detail::empty_trajectory(p, Producer::Riccati);
    tr.times = p.sample_times();
    auto plus = detail::riccati_branch(p, +1, E0.plus, base.plus, tr.times);
    auto minus = detail::riccati_branch(p, -1, E0.minus, base.minus, tr.times);
    tr.psi_plus = std::move(plus.psi);
    tr.E_plus = std::move(plus.E);
    tr.psi_minus = std::move(minus.psi);
    tr.E_minus = std::move(minus.E);
    tr.pole_intervals = std::move(plus.poles);
    tr.pole_intervals.insert(tr.pole_intervals.end(), minus.poles.begin(), minus.poles.end());
    tr.stats = plus.stats;
    detail::accumulate(tr.stats, minus.stats);
    return tr;
}

struct SecondOrderIc {
    cplx psi_plus, dpsi_plus;
    cplx psi_minus, dpsi_minus;
};

/// Initial data for route C consistent with the coupled system at t0.
inline SecondOrderIc lifted_initial_conditions(const ScenarioParams& p) {
    const auto psi = initial_psi(p);
    const double m = evaluate_profile(p.profile, p.t0).mass;
    const auto d = detail::coupled_derivative(p.convention, m, p.k, psi.plus, psi.minus);
    return {psi.plus, d.plus, psi.minus, d.minus};
}

/// Route C: the decoupled second-order equations H psi = k^2 psi.
inline ModeTrajectory solve_second_order(const ScenarioParams& p, const SecondOrderIc& ic) {
    p.validate();
    p.require_integrable();
    auto tr = detail::empty_trajectory(p, Producer::SecondOrder);
    const auto samples = p.sample_times();
    const double scale = p.energy_scale();

    auto rhs = [&p](double t, const ode::State<4>& y, ode::State<4>& dy) {
        dy[0] = y[1];
        dy[1] = detail::second_order_coefficient(p.convention, p.profile, p.k, t, +1) * y[0];
        dy[2] = y[3];
        dy[3] = detail::second_order_coefficient(p.convention, p.profile, p.k, t, -1) * y[2];
    };
    auto sink = [&](double t, const ode::State<4>& y) {
        tr.times.push_back(t);
        tr.psi_plus.push_back(y[0]);
        tr.psi_minus.push_back(y[2]);
        tr.E_plus.push_back(detail::log_derivative(p.convention, y[0], y[1], scale));
        tr.E_minus.push_back(detail::log_derivative(p.convention, y[2], y[3], scale));
    };
    auto guard = [](double, const ode::State<4>& y) {
        detail::check_magnitude(std::max(std::abs(y[0]), std::abs(y[2])));
        return false;
    };

    ode::Dop853<4> solver(p.tolerances());
    std::size_t cursor = 0;
    solver.integrate(rhs, p.t0, ode::State<4>{ic.psi_plus, ic.dpsi_plus, ic.psi_minus, ic.dpsi_minus}, p.t1, samples,
                     cursor, sink, guard);
    tr.stats = solver.stats();
    return tr;
}

/// Exact propagator of the coupled system for a constant mass.
inline ModeTrajectory constant_mass_closed_form(const ScenarioParams& p) {
    p.validate();
    if (p.profile.kind() != MassProfile::Kind::Constant)
        throw Error(ErrorKind::Config, "closed-form trajectory needs a constant mass");
    auto tr = detail::empty_trajectory(p, Producer::ClosedForm);
    const double m = p.profile.m0(), k = p.k, E = std::hypot(k, m);
    const auto psi0 = initial_psi(p);
    for (double t : p.sample_times()) {
        const double tau = t - p.t0;
        cplx c, s;   // psi(t) = c psi0 + s A psi0 with A = [[m, k], [k, -m]]
        if (p.convention == Convention::Physical) {
            c = std::cos(E * tau);
            s = E > 0 ? cplx(0, -std::sin(E * tau) / E) : cplx(0, -tau);
        } else {
            c = std::cosh(E * tau);
            s = E > 0 ? std::sinh(E * tau) / E : tau;
        }
        const cplx ap = m * psi0.plus + k * psi0.minus, am = k * psi0.plus - m * psi0.minus;
        detail::push_coupled_sample(tr, t, c * psi0.plus + s * ap, c * psi0.minus + s * am);
    }
    return tr;
}

// ---------------------------------------------------------------------------

struct RouteDeviation {
    std::string routes;   // e.g. "A-B"
    double psi_plus = detail::nan, psi_minus = detail::nan;
    double E_plus = detail::nan, E_minus = detail::nan;

    double worst() const {
        double w = 0.0;
        for (double v : {psi_plus, psi_minus, E_plus, E_minus})
            if (std::isfinite(v)) w = std::max(w, v);
        return w;
    }
};

struct ConsistencyReport {
    std::vector<RouteDeviation> deviations;
    std::vector<TimeInterval> poles;
    std::vector<std::string> failures;
    double threshold = 0.0;
    double seconds = 0.0;
    bool pass = false;
};

/// sup|a - b| / sup|b| over samples where both are finite and away from poles.
inline double relative_sup_deviation(const std::vector<cplx>& a, const std::vector<cplx>& b,
                                     const std::vector<double>& times, const std::vector<TimeInterval>& poles) {
    double diff = 0.0, ref = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        bool skip = false;
        for (const auto& iv : poles)
            if (iv.contains(times[i])) skip = true;
        if (skip) continue;
        if (!std::isfinite(std::abs(a[i])) || !std::isfinite(std::abs(b[i]))) continue;
        diff = std::max(diff, std::abs(a[i] - b[i]));
        ref = std::max(ref, std::abs(b[i]));
        any = true;
    }
    if (!any) return detail::nan;
    return ref > 0.0 ? diff / ref : diff;
}

inline RouteDeviation compare_trajectories(const std::string& label, const ModeTrajectory& a, const ModeTrajectory& b) {
    std::vector<TimeInterval> poles = a.pole_intervals;
    poles.insert(poles.end(), b.pole_intervals.begin(), b.pole_intervals.end());
    return {label, relative_sup_deviation(a.psi_plus, b.psi_plus, b.times, poles),
            relative_sup_deviation(a.psi_minus, b.psi_minus, b.times, poles),
            relative_sup_deviation(a.E_plus, b.E_plus, b.times, poles),
            relative_sup_deviation(a.E_minus, b.E_minus, b.times, poles)};
}

/// Runs routes A, B and C from matched initial data. Route failures are
/// recorded, never thrown.
inline ConsistencyReport consistency_report(const ScenarioParams& p) {
    const auto start = std::chrono::steady_clock::now();
    ConsistencyReport rep;
    rep.threshold = 100.0 * p.rel_tol;

    std::optional<ModeTrajectory> a, b, c;
    try {
        a = solve_coupled(p);
    } catch (const std::exception& e) {
        rep.failures.push_back(std::string("route A: ") + e.what());
    }
    try {
        const auto psi0 = initial_psi(p);
        const double m = evaluate_profile(p.profile, p.t0).mass;
        const auto E0 = energies_from_psi(p.convention, m, p.k, psi0.plus, psi0.minus, p.energy_scale());
        b = solve_riccati(p, E0, psi0);
        rep.poles = b->pole_intervals;
    } catch (const std::exception& e) {
        rep.failures.push_back(std::string("route B: ") + e.what());
    }
    try {
        c = solve_second_order(p, lifted_initial_conditions(p));
    } catch (const std::exception& e) {
        rep.failures.push_back(std::string("route C: ") + e.what());
    }

    if (a && b) rep.deviations.push_back(compare_trajectories("A-B", *b, *a));
    if (a && c) rep.deviations.push_back(compare_trajectories("A-C", *c, *a));
    if (b && c) rep.deviations.push_back(compare_trajectories("B-C", *b, *c));

    rep.pass = rep.failures.empty();
    for (const auto& d : rep.deviations)
        if (!(d.worst() <= rep.threshold)) rep.pass = false;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

} // namespace tsusy
