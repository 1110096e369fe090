#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tsusy/dynamics.hpp"
#include "tsusy/error.hpp"
#include "tsusy/profiles.hpp"
#include "tsusy/quadrature.hpp"

namespace tsusy {

enum class Regime { Massive, UltraRelativisticQuadrature, UltraRelativisticSinusoidal };

inline const char* to_string(Regime r) {
    switch (r) {
    case Regime::Massive: return "massive";
    case Regime::UltraRelativisticQuadrature: return "ultra_relativistic_quadrature";
    case Regime::UltraRelativisticSinusoidal: return "ultra_relativistic_sinusoidal";
    }
    return "?";
}

// Small parameters above this make a perturbative regime inapplicable.
inline constexpr double applicability_threshold = 0.3;

struct SmallParameter {
    std::string name;
    double value;
};

inline bool all_applicable(const std::vector<SmallParameter>& params) {
    for (const auto& p : params)
        if (!(p.value < applicability_threshold)) return false;
    return true;
}

struct LimitSolution {
    std::vector<double> times;
    std::vector<cplx> E_plus, E_minus;
    Regime regime = Regime::Massive;
    EnergyFrame frame = EnergyFrame::Physical;
    std::vector<SmallParameter> validity;
    bool applicable = true;

    // Quadrature only: constant fixed by the t = 0 boundary and whether its
    // asymptotic series had to be cut short.
    cplx boundary_plus{}, boundary_minus{};
    bool boundary_truncated = false;
};

/// k << m: E+- = +-m (Physical) or -+m (Wick).
inline LimitSolution limit_E_massive(const MassProfile& profile, const std::vector<double>& times, Convention convention,
                                     double k = 0.0) {
    LimitSolution out;
    out.times = times;
    out.regime = Regime::Massive;
    out.frame = frame_of(convention);
    const double sign = convention == Convention::Physical ? 1.0 : -1.0;
    for (double t : times) {
        const double m = evaluate_profile(profile, t).mass;
        out.E_plus.emplace_back(sign * m);
        out.E_minus.emplace_back(-sign * m);
    }
    const double m0 = profile.mass_scale();
    out.validity.push_back({"k/m0", m0 > 0 ? k / m0 : (k > 0 ? INFINITY : 0.0)});
    out.applicable = all_applicable(out.validity);
    return out;
}

namespace detail {

inline double binomial(int n, int j) {
    double r = 1.0;
    for (int i = 1; i <= j; ++i) r = r * (n - j + i) / i;
    return r;
}

inline constexpr int boundary_series_terms = 40;

/// n-th derivative at t of f(t) = i m^2 - sign m', the source term of the
/// linearised Riccati equation E' + 2ik(E - k) = f in the oscillation frame.
/// Returns nullopt when the profile does not supply enough derivatives.
inline std::optional<cplx> ur_source_derivative(const MassProfile& profile, double t, int sign, int n) {
    const auto high = profile.derivative(t, n + 1);
    if (!high) return std::nullopt;
    double square = 0.0;   // (m^2)^(n)
    for (int j = 0; j <= n; ++j) {
        const auto a = profile.derivative(t, j), b = profile.derivative(t, n - j);
        if (!a || !b) return std::nullopt;
        square += binomial(n, j) * *a * *b;
    }
    return cplx(-sign * *high, square);
}

struct BoundarySeries {
    cplx value;
    bool truncated;
};

/// sum_n (-1)^n f^(n)(0) / (2ik)^(n+1): the constant that selects the
/// non-oscillating particular solution.
inline BoundarySeries ur_boundary(const MassProfile& profile, double k, int sign) {
    const cplx two_ik(0.0, 2.0 * k);
    cplx sum = 0.0, denom = two_ik;
    double previous = INFINITY;
    bool truncated = true;
    for (int n = 0; n < boundary_series_terms; ++n) {
        const auto d = ur_source_derivative(profile, 0.0, sign, n);
        if (!d) break;
        const cplx term = (n % 2 == 0 ? 1.0 : -1.0) * *d / denom;
        sum += term;
        // Odd and even orders can vanish separately, so look at two in a row.
        const double size = std::max(previous, std::abs(term));
        if (n > 0 && size <= 1e-17 * std::abs(sum)) {
            truncated = false;
            break;
        }
        previous = std::abs(term);
        denom *= two_ik;
    }
    if (profile.kind() == MassProfile::Kind::Constant) truncated = false;
    return {sum, truncated};
}

} // namespace detail

/// m << k: E(t) = k + exp(-2ikt) [ int_0^t f(s) exp(2iks) ds + C ] with
/// f = i m^2 -+ m' and C the boundary constant. Results are in the
/// oscillation frame, like the sinusoidal closed form.
inline LimitSolution limit_E_ur_quadrature(const MassProfile& profile, double k, const std::vector<double>& times) {
    if (!(k > 0.0)) throw Error(ErrorKind::Config, "ultra-relativistic limit needs k > 0");
    profile.require_in_domain(0.0);
    double previous = 0.0;
    for (double t : times) {
        if (t < 0.0) throw Error(ErrorKind::Domain, "ultra-relativistic quadrature starts at t = 0");
        if (t < previous) throw Error(ErrorKind::Config, "times must be non-decreasing");
        profile.require_in_domain(t);
        previous = t;
    }
    if (!times.empty() && k * times.back() / std::numbers::pi > 2 * max_integrable_cycles)
        throw Error(ErrorKind::Hierarchy, "too many oscillations for quadrature; use the sinusoidal closed form");

    LimitSolution out;
    out.times = times;
    out.regime = Regime::UltraRelativisticQuadrature;
    out.frame = EnergyFrame::Oscillation;
    const double m0 = profile.mass_scale();
    out.validity.push_back({"m0/k", m0 / k});
    if (profile.kind() == MassProfile::Kind::Sinusoidal) out.validity.push_back({"lambda/k", profile.lambda() / k});
    out.applicable = all_applicable(out.validity);

    std::vector<double> breaks;
    if (profile.kind() == MassProfile::Kind::Tabulated) breaks = profile.table().times();

    const cplx two_ik(0.0, 2.0 * k);
    for (int sign : {+1, -1}) {
        const auto boundary = detail::ur_boundary(profile, k, sign);
        auto integrand = [&](double s) {
            const auto v = evaluate_profile(profile, s);
            return cplx(-sign * v.rate, v.mass * v.mass) * std::exp(two_ik * s);
        };
        cplx running = 0.0;
        double from = 0.0;
        std::size_t node = 0;
        auto& E = sign > 0 ? out.E_plus : out.E_minus;
        for (double t : times) {
            // Tabulated profiles are only piecewise smooth: integrate node to node.
            const double resolution = 1e-12 * std::max(1.0, t);
            while (node < breaks.size() && breaks[node] < t) {
                if (breaks[node] > from + resolution && breaks[node] < t - resolution) {
                    running += integrate_adaptive(integrand, from, breaks[node], 1e-12);
                    from = breaks[node];
                }
                ++node;
            }
            if (t > from) {
                running += integrate_adaptive(integrand, from, t, 1e-12);
                from = t;
            }
            E.push_back(k + std::exp(-two_ik * t) * (running + boundary.value));
        }
        (sign > 0 ? out.boundary_plus : out.boundary_minus) = boundary.value;
        out.boundary_truncated = out.boundary_truncated || boundary.truncated;
    }
    return out;
}

namespace detail {

inline void ur_pole_guard(double k, double lambda) {
    if (std::abs(2 * k - lambda) <= 1e-6 * 2 * k)
        throw Error(ErrorKind::Pole, "closed form is singular at lambda = 2k");
    if (std::abs(k - lambda) <= 1e-6 * k) throw Error(ErrorKind::Pole, "closed form is singular at lambda = k");
}

} // namespace detail

/// Sinusoidal-mass ultra-relativistic closed form, oscillation frame.
inline LimitSolution limit_E_ur_sinusoidal(double m0, double lambda, double k, const std::vector<double>& times) {
    if (!(k > 0.0) || !(lambda > 0.0) || !(m0 >= 0.0))
        throw Error(ErrorKind::Config, "need k > 0, lambda > 0, m0 >= 0");
    detail::ur_pole_guard(k, lambda);
    LimitSolution out;
    out.times = times;
    out.regime = Regime::UltraRelativisticSinusoidal;
    out.frame = EnergyFrame::Oscillation;
    out.validity = {{"m0/k", m0 / k}, {"lambda/k", lambda / k}};
    out.applicable = all_applicable(out.validity);

    const double k2 = k * k, l2 = lambda * lambda;
    const double a = m0 * m0 / (4 * k);
    const double b = m0 * l2 / (4 * k2 - l2);
    const double c = k * m0 * m0 / (4 * (k2 - l2));
    const double d = 2 * k * m0 * lambda / (4 * k2 - l2);
    const double e = m0 * m0 * lambda / (4 * (k2 - l2));
    for (double t : times) {
        const double s1 = std::sin(lambda * t), c1 = std::cos(lambda * t);
        const double s2 = std::sin(2 * lambda * t), c2 = std::cos(2 * lambda * t);
        const double re_common = k + a - c * c2, im_common = e * s2;
        out.E_plus.emplace_back(re_common + b * s1, im_common + d * c1);
        out.E_minus.emplace_back(re_common - b * s1, im_common - d * c1);
    }
    return out;
}

} // namespace tsusy
