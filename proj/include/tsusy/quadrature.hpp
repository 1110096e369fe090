#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include <type_traits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "tsusy/error.hpp"

namespace tsusy {

namespace detail {

/// Integrals over [a, b] of the three Lagrange basis polynomials through x.
inline std::array<double, 3> quadratic_weights(const std::array<double, 3>& x, double a, double b) {
    std::array<double, 3> w{};
    for (int j = 0; j < 3; ++j) {
        const double p = x[(j + 1) % 3], q = x[(j + 2) % 3];
        const double den = (x[j] - p) * (x[j] - q);
        // (s - p)(s - q) = s^2 - (p + q) s + p q
        auto prim = [&](double s) { return s * s * s / 3.0 - (p + q) * s * s / 2.0 + p * q * s; };
        w[j] = (prim(b) - prim(a)) / den;
    }
    return w;
}

} // namespace detail

/// Running integral of sampled values by composite Simpson. Even indices get
/// the exact Simpson sums; odd ones add the partial panel of the local quadratic.
/// Works on non-uniform grids.
template <class T>
std::vector<T> cumulative_simpson(std::span<const double> t, std::span<const T> f) {
    if (t.size() != f.size()) throw Error(ErrorKind::Config, "quadrature: sample count mismatch");
    if (t.size() < 3) throw Error(ErrorKind::Config, "quadrature: need at least 3 samples");
    const std::size_t n = t.size();
    std::vector<T> out(n, T{});
    auto panel = [&](std::size_t first, double a, double b) {
        // Subtract t[first] before integrating so large absolute times keep precision.
        const double o = t[first];
        const auto w = detail::quadratic_weights({0.0, t[first + 1] - o, t[first + 2] - o}, a - o, b - o);
        return w[0] * f[first] + w[1] * f[first + 1] + w[2] * f[first + 2];
    };
    for (std::size_t i = 1; i < n; ++i) {
        if (i % 2 == 0) {
            out[i] = out[i - 2] + panel(i - 2, t[i - 2], t[i]);
        } else {
            const std::size_t first = i + 1 < n ? i - 1 : i - 2;
            out[i] = out[i - 1] + panel(first, t[i - 1], t[i]);
        }
    }
    return out;
}

template <class T>
std::vector<T> cumulative_simpson(const std::vector<double>& t, const std::vector<T>& f) {
    return cumulative_simpson(std::span<const double>(t), std::span<const T>(f));
}

namespace detail {

template <class F>
double gsl_trampoline(double x, void* params) {
    return (*static_cast<F*>(params))(x);
}

/// One real-valued QAG (21-point Gauss-Kronrod) integral with absolute floor.
template <class F>
double qag(F& f, double a, double b, double abs_tol, double rel_tol, gsl_integration_workspace* ws) {
    gsl_function fn{&gsl_trampoline<F>, &f};
    double result = 0.0, err = 0.0;
    const int status = gsl_integration_qag(&fn, a, b, abs_tol, rel_tol, ws->limit, GSL_INTEG_GAUSS21, ws, &result, &err);
    if (status != GSL_SUCCESS) throw Error(ErrorKind::Tolerance, "adaptive quadrature did not converge");
    return result;
}

/// Rough integral of |f| from a single 21-point rule, used as the error scale.
template <class F>
double magnitude_scale(F& f, double a, double b) {
    gsl_function fn{&gsl_trampoline<F>, &f};
    double result, err, resabs, resasc;
    gsl_integration_qk21(&fn, a, b, &result, &err, &resabs, &resasc);
    return resabs;
}

struct Workspace {
    gsl_integration_workspace* ws;
    explicit Workspace(std::size_t n) : ws(gsl_integration_workspace_alloc(n)) {}
    ~Workspace() { gsl_integration_workspace_free(ws); }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
};

inline void silence_gsl() {
    static const bool done = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)done;
}

} // namespace detail

/// Adaptive quadrature (GSL QAG) of a real or complex integrand. The error
/// target is rel_tol times the integral of |f|, so oscillatory integrals with
/// small net value still converge. Throws Tolerance on failure.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, double rel_tol) {
    using V = decltype(f(a));
    detail::silence_gsl();
    thread_local detail::Workspace work(4096);
    if constexpr (std::is_floating_point_v<V>) {
        auto g = [&](double x) { return static_cast<double>(f(x)); };
        auto mag = [&](double x) { return std::abs(g(x)); };
        const double floor = rel_tol * detail::magnitude_scale(mag, a, b);
        return detail::qag(g, a, b, floor, rel_tol, work.ws);
    } else {
        auto re = [&](double x) { return f(x).real(); };
        auto im = [&](double x) { return f(x).imag(); };
        auto mag = [&](double x) { return std::abs(f(x)); };
        const double floor = rel_tol * detail::magnitude_scale(mag, a, b);
        return V(detail::qag(re, a, b, floor, rel_tol, work.ws), detail::qag(im, a, b, floor, rel_tol, work.ws));
    }
}

} // namespace tsusy
