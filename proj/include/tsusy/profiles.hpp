#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tsusy/error.hpp"

namespace tsusy {

// Natural units throughout: energies in eV, times in 1/eV.

struct MassSample {
    double mass;
    double rate;   // dm/dt
};

struct TimeInterval {
    double lo;
    double hi;
    bool contains(double t, double slack = 0.0) const { return t >= lo - slack && t <= hi + slack; }
};

namespace detail {

// Derivative at stencil[center] of the Lagrange polynomial through the stencil.
inline double lagrange_derivative(const std::vector<double>& x, const std::vector<double>& y,
                                  std::size_t first, std::size_t count, std::size_t center) {
    const double xc = x[center];
    double result = 0.0;
    for (std::size_t j = first; j < first + count; ++j) {
        double weight;
        if (j == center) {
            weight = 0.0;
            for (std::size_t l = first; l < first + count; ++l)
                if (l != center) weight += 1.0 / (xc - x[l]);
        } else {
            double num = 1.0, den = 1.0;
            for (std::size_t l = first; l < first + count; ++l) {
                if (l == j) continue;
                den *= x[j] - x[l];
                if (l != center) num *= xc - x[l];
            }
            weight = num / den;
        }
        result += weight * y[j];
    }
    return result;
}

} // namespace detail

/// Piecewise cubic Hermite curve through (t_i, m_i) with node slopes from
/// 5-point Lagrange differences (central inside, shifted at the edges).
class TabulatedCurve {
public:
    TabulatedCurve() = default;

    TabulatedCurve(std::vector<double> t, std::vector<double> m) : t_(std::move(t)), m_(std::move(m)) {
        if (t_.size() != m_.size()) throw Error(ErrorKind::Config, "tabulated: column length mismatch");
        if (t_.size() < 4) throw Error(ErrorKind::Config, "tabulated: need at least 4 samples");
        for (std::size_t i = 0; i < t_.size(); ++i) {
            if (!std::isfinite(t_[i]) || !std::isfinite(m_[i]))
                throw Error(ErrorKind::Config, "tabulated: non-finite sample");
            if (i > 0 && !(t_[i] > t_[i - 1]))
                throw Error(ErrorKind::Config, "tabulated: times must be strictly increasing");
        }
        const std::size_t n = t_.size();
        const std::size_t width = std::min<std::size_t>(5, n);
        slope_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t first = std::min(i >= 2 ? i - 2 : 0, n - width);
            slope_[i] = detail::lagrange_derivative(t_, m_, first, width, i);
        }
    }

    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return m_; }
    TimeInterval hull() const { return {t_.front(), t_.back()}; }

    MassSample evaluate(double t) const {
        const auto [i, s, h] = locate(t);
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        const double value = h00 * m_[i] + h10 * h * slope_[i] + h01 * m_[i + 1] + h11 * h * slope_[i + 1];
        const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
        const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
        const double rate = (d00 * m_[i] + d01 * m_[i + 1]) / h + d10 * slope_[i] + d11 * slope_[i + 1];
        return {value, rate};
    }

    /// Exact integral of the interpolant over [a, b] (both inside the hull).
    double integral(double a, double b) const {
        if (b < a) return -integral(b, a);
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
            const double lo = std::max(a, t_[i]), hi = std::min(b, t_[i + 1]);
            if (hi <= lo) continue;
            if (lo == t_[i] && hi == t_[i + 1]) {
                const double h = hi - lo;
                total += h * (m_[i] + m_[i + 1]) / 2 + h * h * (slope_[i] - slope_[i + 1]) / 12;
            } else {
                // 3-point Gauss-Legendre is exact for the cubic piece.
                const double mid = (lo + hi) / 2, half = (hi - lo) / 2;
                const double node = std::sqrt(0.6);
                total += half * (5.0 / 9.0 * evaluate(mid - half * node).mass +
                                 8.0 / 9.0 * evaluate(mid).mass +
                                 5.0 / 9.0 * evaluate(mid + half * node).mass);
            }
        }
        return total;
    }

private:
    struct Cell {
        std::size_t index;
        double s;
        double h;
    };

    Cell locate(double t) const {
        t = std::clamp(t, t_.front(), t_.back());
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
        if (i >= t_.size() - 1) i = t_.size() - 2;
        const double h = t_[i + 1] - t_[i];
        return {i, (t - t_[i]) / h, h};
    }

    std::vector<double> t_;
    std::vector<double> m_;
    std::vector<double> slope_;
};

/// Time-dependent mass m(t): constant, m0 sin(lambda t) on [0, pi/lambda], or tabulated.
class MassProfile {
public:
    enum class Kind { Constant, Sinusoidal, Tabulated };

    static MassProfile constant(double m) {
        if (!std::isfinite(m)) throw Error(ErrorKind::Config, "constant mass must be finite");
        MassProfile p;
        p.kind_ = Kind::Constant;
        p.m0_ = m;
        return p;
    }

    static MassProfile sinusoidal(double m0, double lambda) {
        if (!(m0 >= 0.0) || !std::isfinite(m0))
            throw Error(ErrorKind::Config, "sinusoidal amplitude must be finite and non-negative");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw Error(ErrorKind::Config, "sinusoidal frequency must be positive");
        MassProfile p;
        p.kind_ = Kind::Sinusoidal;
        p.m0_ = m0;
        p.lambda_ = lambda;
        return p;
    }

    static MassProfile tabulated(std::vector<double> t, std::vector<double> m) {
        MassProfile p;
        p.kind_ = Kind::Tabulated;
        p.table_ = TabulatedCurve(std::move(t), std::move(m));
        return p;
    }

    Kind kind() const { return kind_; }
    double m0() const { return m0_; }
    double lambda() const { return lambda_; }
    const TabulatedCurve& table() const { return table_; }

    TimeInterval domain() const {
        switch (kind_) {
        case Kind::Constant:
            return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        case Kind::Sinusoidal: return {0.0, std::numbers::pi / lambda_};
        case Kind::Tabulated: return table_.hull();
        }
        return {0.0, 0.0};
    }

    /// Rounding allowance at the domain edges (pi/lambda is not exactly representable).
    double domain_slack() const {
        const auto d = domain();
        if (!std::isfinite(d.hi)) return 0.0;
        return 1e-12 * std::max({1.0, std::abs(d.lo), std::abs(d.hi)});
    }

    bool in_domain(double t) const { return domain().contains(t, domain_slack()); }

    void require_in_domain(double t) const {
        if (!in_domain(t)) {
            const auto d = domain();
            std::ostringstream msg;
            msg << "t = " << t << " outside profile domain [" << d.lo << ", " << d.hi << "]";
            throw Error(ErrorKind::Domain, msg.str());
        }
    }

    /// Largest |m| over the domain.
    double mass_scale() const {
        switch (kind_) {
        case Kind::Constant: return std::abs(m0_);
        case Kind::Sinusoidal: return m0_;
        case Kind::Tabulated: {
            double s = 0.0;
            for (double v : table_.values()) s = std::max(s, std::abs(v));
            return s;
        }
        }
        return 0.0;
    }

    /// n-th time derivative of m where it is known analytically
    /// (any order for Constant/Sinusoidal, order <= 1 for Tabulated).
    std::optional<double> derivative(double t, int order) const {
        require_in_domain(t);
        switch (kind_) {
        case Kind::Constant: return order == 0 ? m0_ : 0.0;
        case Kind::Sinusoidal:
            return m0_ * std::pow(lambda_, order) *
                   std::sin(lambda_ * t + order * std::numbers::pi / 2);
        case Kind::Tabulated:
            if (order == 0) return table_.evaluate(t).mass;
            if (order == 1) return table_.evaluate(t).rate;
            return std::nullopt;
        }
        return std::nullopt;
    }

    /// Integral of m over [a, b].
    double integral(double a, double b) const {
        require_in_domain(a);
        require_in_domain(b);
        switch (kind_) {
        case Kind::Constant: return m0_ * (b - a);
        case Kind::Sinusoidal: return m0_ * (std::cos(lambda_ * a) - std::cos(lambda_ * b)) / lambda_;
        case Kind::Tabulated: return table_.integral(a, b);
        }
        return 0.0;
    }

    std::string describe() const {
        std::ostringstream out;
        out.precision(17);
        switch (kind_) {
        case Kind::Constant: out << "constant(" << m0_ << ")"; break;
        case Kind::Sinusoidal: out << "sinusoidal(" << m0_ << ", " << lambda_ << ")"; break;
        case Kind::Tabulated: out << "tabulated(" << table_.times().size() << " samples)"; break;
        }
        return out.str();
    }

private:
    MassProfile() = default;

    Kind kind_ = Kind::Constant;
    double m0_ = 0.0;
    double lambda_ = 0.0;
    TabulatedCurve table_;
};

/// m(t) and dm/dt. Throws ErrorKind::Domain outside the profile domain.
inline MassSample evaluate_profile(const MassProfile& profile, double t) {
    profile.require_in_domain(t);
    switch (profile.kind()) {
    case MassProfile::Kind::Constant: return {profile.m0(), 0.0};
    case MassProfile::Kind::Sinusoidal: {
        const double phase = profile.lambda() * t;
        return {profile.m0() * std::sin(phase), profile.m0() * profile.lambda() * std::cos(phase)};
    }
    case MassProfile::Kind::Tabulated: return profile.table().evaluate(t);
    }
    return {0.0, 0.0};
}

struct SuperpotentialPair {
    double w_plus;
    double w_minus;
    double evaluated_at;
};

/// W+- = -+ dm/dt - m^2, so that W- - W+ = 2 dm/dt.
inline SuperpotentialPair superpotentials(const MassProfile& profile, double t) {
    const auto [m, rate] = evaluate_profile(profile, t);
    return {-rate - m * m, rate - m * m, t};
}

struct RefractionIndices {
    std::complex<double> n_plus;
    std::complex<double> n_minus;
    double relation_residual;   // |1/n+^2 - 1/n-^2 - 2 dm/dt|
};

/// n+- = (k^2 - W+-)^(-1/2) on the principal square-root branch.
inline RefractionIndices refraction_indices(const MassProfile& profile, double k, double t) {
    const double rate = evaluate_profile(profile, t).rate;
    const auto w = superpotentials(profile, t);
    const double gap_plus = k * k - w.w_plus;
    const double gap_minus = k * k - w.w_minus;
    if (gap_plus == 0.0 || gap_minus == 0.0)
        throw Error(ErrorKind::Pole, "k^2 - W vanishes: refraction index diverges");
    // Build with +0 imaginary part so negative gaps land on +i sqrt(|gap|).
    const auto n_plus = 1.0 / std::sqrt(std::complex<double>(gap_plus, 0.0));
    const auto n_minus = 1.0 / std::sqrt(std::complex<double>(gap_minus, 0.0));
    const auto inv_sq = [](std::complex<double> n) { return 1.0 / (n * n); };
    const double residual = std::abs(inv_sq(n_plus) - inv_sq(n_minus) - 2.0 * rate);
    return {n_plus, n_minus, residual};
}

// ---------------------------------------------------------------------------
// Profile specification grammar: constant(m) | sinusoidal(m0, lambda) | tabulated(path)

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

inline double parse_double(std::string_view text, const char* what) {
    const std::string s = trim(text);
    double value = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (s.empty() || ec != std::errc() || ptr != end)
        throw Error(ErrorKind::Config, std::string("cannot parse ") + what + " from '" + s + "'");
    return value;
}

} // namespace detail

/// Reads a two-column CSV `t,m`; a non-numeric first line is treated as a header.
inline MassProfile load_tabulated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open tabulated profile '" + path + "'");
    std::vector<double> t, m;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const std::string row = detail::trim(line);
        if (row.empty() || row[0] == '#') continue;
        const auto comma = row.find(',');
        if (comma == std::string::npos)
            throw Error(ErrorKind::Config, "tabulated profile: expected 't,m' rows in '" + path + "'");
        try {
            const double tv = detail::parse_double(std::string_view(row).substr(0, comma), "time");
            const double mv = detail::parse_double(std::string_view(row).substr(comma + 1), "mass");
            t.push_back(tv);
            m.push_back(mv);
        } catch (const Error&) {
            if (!first) throw;
        }
        first = false;
    }
    return MassProfile::tabulated(std::move(t), std::move(m));
}

inline MassProfile parse_profile_spec(std::string_view spec) {
    const std::string s = detail::trim(spec);
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
        throw Error(ErrorKind::Config, "malformed profile spec '" + s + "'");
    const std::string name = detail::trim(std::string_view(s).substr(0, open));
    const std::string args = s.substr(open + 1, s.size() - open - 2);
    std::vector<std::string> parts;
    {
        std::size_t start = 0;
        while (true) {
            const auto comma = args.find(',', start);
            parts.push_back(detail::trim(std::string_view(args).substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (name == "constant") {
        if (parts.size() != 1) throw Error(ErrorKind::Config, "constant(m) takes one argument");
        return MassProfile::constant(detail::parse_double(parts[0], "mass"));
    }
    if (name == "sinusoidal") {
        if (parts.size() != 2) throw Error(ErrorKind::Config, "sinusoidal(m0, lambda) takes two arguments");
        return MassProfile::sinusoidal(detail::parse_double(parts[0], "m0"),
                                       detail::parse_double(parts[1], "lambda"));
    }
    if (name == "tabulated") {
        if (parts.size() != 1 || parts[0].empty())
            throw Error(ErrorKind::Config, "tabulated(path) takes one argument");
        return load_tabulated_csv(parts[0]);
    }
    throw Error(ErrorKind::Config, "unknown profile kind '" + name + "'");
}

} // namespace tsusy
