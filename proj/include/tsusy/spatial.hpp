#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "tsusy/error.hpp"
#include "tsusy/operators.hpp"
#include "tsusy/profiles.hpp"

namespace tsusy {

using Spinor = std::array<std::complex<double>, 2>;
using Pauli = std::array<std::array<std::complex<double>, 2>, 2>;

/// Dirac-basis Pauli matrices sigma^1, sigma^2, sigma^3.
inline const std::array<Pauli, 3>& pauli_matrices() {
    using c = std::complex<double>;
    static const std::array<Pauli, 3> s{{
        {{{c(0), c(1)}, {c(1), c(0)}}},
        {{{c(0), c(0, -1)}, {c(0, 1), c(0)}}},
        {{{c(1), c(0)}, {c(0), c(-1)}}},
    }};
    return s;
}

inline Spinor act(const Pauli& m, const Spinor& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

/// a^dagger b
inline std::complex<double> inner(const Spinor& a, const Spinor& b) {
    return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

/// e_+ = (1, 0), e_- = (0, 1)
inline Spinor basis_spinor(int sign) { return sign > 0 ? Spinor{1.0, 0.0} : Spinor{0.0, 1.0}; }

/// The x^3 factor f of the ansatz.
class AxialProfile {
public:
    enum class Kind { Constant, Gaussian, Tabulated };

    static AxialProfile constant(double value = 1.0) {
        if (!std::isfinite(value)) throw Error(ErrorKind::Config, "f: constant must be finite");
        AxialProfile f;
        f.kind_ = Kind::Constant;
        f.scale_ = value;
        return f;
    }

    static AxialProfile gaussian(double width, double center = 0.0, double amplitude = 1.0) {
        if (!(width > 0.0) || !std::isfinite(width)) throw Error(ErrorKind::Config, "f: gaussian width must be > 0");
        if (!std::isfinite(center) || !std::isfinite(amplitude)) throw Error(ErrorKind::Config, "f: non-finite parameter");
        AxialProfile f;
        f.kind_ = Kind::Gaussian;
        f.width_ = width;
        f.center_ = center;
        f.scale_ = amplitude;
        return f;
    }

    static AxialProfile tabulated(std::vector<double> x, std::vector<double> f) {
        AxialProfile p;
        p.kind_ = Kind::Tabulated;
        p.curve_ = TabulatedCurve(std::move(x), std::move(f));
        return p;
    }

    Kind kind() const { return kind_; }

    /// Same profile times a constant.
    AxialProfile scaled(double c) const {
        AxialProfile p = *this;
        if (kind_ == Kind::Tabulated) {
            auto v = curve_.values();
            for (auto& x : v) x *= c;
            p.curve_ = TabulatedCurve(curve_.times(), std::move(v));
        } else {
            p.scale_ *= c;
        }
        return p;
    }

    /// (f, f')
    std::pair<double, double> evaluate(double z) const {
        switch (kind_) {
        case Kind::Constant: return {scale_, 0.0};
        case Kind::Gaussian: {
            const double u = (z - center_) / width_;
            const double v = scale_ * std::exp(-u * u);
            return {v, -2 * u / width_ * v};
        }
        case Kind::Tabulated: {
            const auto h = curve_.hull();
            if (!h.contains(z)) throw Error(ErrorKind::Domain, "f: x3 outside tabulated range");
            const auto s = curve_.evaluate(z);
            return {s.mass, s.rate};
        }
        }
        return {0.0, 0.0};
    }

private:
    Kind kind_ = Kind::Constant;
    double scale_ = 1.0, width_ = 1.0, center_ = 0.0;
    TabulatedCurve curve_;
};

struct Region {
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
    std::array<std::size_t, 3> n{32, 32, 32};

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(hi[a] > lo[a]))
                throw Error(ErrorKind::Config, "degenerate region");
            if (n[a] < 16) throw Error(ErrorKind::Config, "region needs at least 16 samples per axis");
        }
    }

    double spacing(int axis) const { return (hi[axis] - lo[axis]) / static_cast<double>(n[axis] - 1); }
    double coordinate(int axis, std::size_t i) const { return lo[axis] + static_cast<double>(i) * spacing(axis); }

    static Region cube(double lo, double hi, std::size_t n) { return {{lo, lo, lo}, {hi, hi, hi}, {n, n, n}}; }
};

enum class Derivatives { FiniteDifference, Analytic };

/// chi_+- = e_+- exp(-k1 x1 -+ i k2 x2) f(x3), with k = k1 + k2.
struct SpatialAnsatz {
    double k1 = 1.0;
    double k2 = 0.0;
    AxialProfile f = AxialProfile::constant();
    Region region;
    Derivatives derivatives = Derivatives::FiniteDifference;

    double k() const { return k1 + k2; }

    void validate() const {
        if (!std::isfinite(k1) || !std::isfinite(k2)) throw Error(ErrorKind::Config, "k1 and k2 must be finite");
        region.validate();
    }

    Spinor chi(int sign, double x, double y, double z) const {
        const auto fz = f.evaluate(z).first;
        const std::complex<double> g = std::exp(std::complex<double>(-k1 * x, -sign * k2 * y)) * fz;
        const Spinor e = basis_spinor(sign);
        return {e[0] * g, e[1] * g};
    }

    /// Exact d chi / d x^axis.
    Spinor chi_derivative(int sign, int axis, double x, double y, double z) const {
        const auto [fz, dfz] = f.evaluate(z);
        const std::complex<double> g = std::exp(std::complex<double>(-k1 * x, -sign * k2 * y));
        std::complex<double> d;
        if (axis == 0) d = -k1 * g * fz;
        else if (axis == 1) d = std::complex<double>(0.0, -sign * k2) * g * fz;
        else d = g * dfz;
        const Spinor e = basis_spinor(sign);
        return {e[0] * d, e[1] * d};
    }
};

struct AnsatzResidual {
    double residual_plus = 0.0;
    double residual_minus = 0.0;
    double k = 0.0;
    std::array<std::size_t, 3> samples{};
    std::array<double, 3> spacing{};

    double worst() const { return std::max(residual_plus, residual_minus); }
};

namespace detail {

// Points closer than this to a face are skipped: the 5-point stencil needs two neighbours.
inline constexpr std::size_t stencil_reach = 2;

inline Spinor central_difference(const Spinor& m2, const Spinor& m1, const Spinor& p1, const Spinor& p2, double h) {
    Spinor d;
    for (int c = 0; c < 2; ++c) d[c] = (m2[c] - 8.0 * m1[c] + 8.0 * p1[c] - p2[c]) / (12.0 * h);
    return d;
}

} // namespace detail

/// sup |chi_+-^dagger sigma^j d_j chi_-+ + k chi_+-^dagger chi_+-| / sup |chi_+-^dagger chi_+-|
/// over the interior of the region.
inline AnsatzResidual ansatz_residual(const SpatialAnsatz& a) {
    a.validate();
    const auto& R = a.region;
    const auto& sigma = pauli_matrices();
    const std::size_t nx = R.n[0], ny = R.n[1], nz = R.n[2];
    auto index = [&](std::size_t i, std::size_t j, std::size_t l) { return (i * ny + j) * nz + l; };

    std::array<std::vector<Spinor>, 2> field;   // [0] = chi_+, [1] = chi_-
    if (a.derivatives == Derivatives::FiniteDifference) {
        for (int b = 0; b < 2; ++b) {
            field[b].resize(nx * ny * nz);
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 0; j < ny; ++j)
                    for (std::size_t l = 0; l < nz; ++l)
                        field[b][index(i, j, l)] = a.chi(b == 0 ? 1 : -1, R.coordinate(0, i), R.coordinate(1, j),
                                                         R.coordinate(2, l));
        }
    }

    AnsatzResidual out;
    out.k = a.k();
    out.samples = R.n;
    out.spacing = {R.spacing(0), R.spacing(1), R.spacing(2)};
    const std::size_t r = detail::stencil_reach;
    for (int sign : {+1, -1}) {
        const int self = sign > 0 ? 0 : 1, other = 1 - self;
        double worst = 0.0, density_sup = 0.0;
        for (std::size_t i = r; i + r < nx; ++i)
            for (std::size_t j = r; j + r < ny; ++j)
                for (std::size_t l = r; l + r < nz; ++l) {
                    const double x = R.coordinate(0, i), y = R.coordinate(1, j), z = R.coordinate(2, l);
                    const Spinor chi_self = a.chi(sign, x, y, z);
                    std::complex<double> lhs = 0.0;
                    for (int axis = 0; axis < 3; ++axis) {
                        Spinor d;
                        if (a.derivatives == Derivatives::Analytic) {
                            d = a.chi_derivative(-sign, axis, x, y, z);
                        } else {
                            const std::array<std::size_t, 3> at{i, j, l};
                            auto shifted = [&](int offset) {
                                auto p = at;
                                p[axis] = static_cast<std::size_t>(static_cast<long>(p[axis]) + offset);
                                return field[other][index(p[0], p[1], p[2])];
                            };
                            d = detail::central_difference(shifted(-2), shifted(-1), shifted(1), shifted(2),
                                                           R.spacing(axis));
                        }
                        lhs += inner(chi_self, act(sigma[axis], d));
                    }
                    const double density = std::real(inner(chi_self, chi_self));
                    worst = std::max(worst, std::abs(lhs + a.k() * density));
                    density_sup = std::max(density_sup, density);
                }
        if (!(density_sup > 0.0) || !std::isfinite(density_sup))
            throw Error(ErrorKind::Underflow, "ansatz density vanishes or overflows on the whole region");
        (sign > 0 ? out.residual_plus : out.residual_minus) = worst / density_sup;
    }
    return out;
}

struct RefinementStudy {
    std::vector<std::size_t> samples;
    std::vector<double> spacing;
    std::vector<AnsatzResidual> residuals;
    double order = 0.0;   // fitted slope of log(worst residual) against log(h), x1 axis spacing
};

/// Residual on a sequence of cubic refinements of the ansatz region.
inline RefinementStudy ansatz_refinement(SpatialAnsatz a, const std::vector<std::size_t>& samples) {
    if (samples.size() < 2) throw Error(ErrorKind::Config, "refinement needs at least two grids");
    RefinementStudy s;
    std::vector<double> errors;
    for (std::size_t n : samples) {
        a.region.n = {n, n, n};
        s.residuals.push_back(ansatz_residual(a));
        s.samples.push_back(n);
        s.spacing.push_back(a.region.spacing(0));
        errors.push_back(s.residuals.back().worst());
    }
    s.order = observed_order(s.spacing, errors);
    return s;
}

} // namespace tsusy
