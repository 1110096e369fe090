#pragma once

#include <numbers>
#include <string>
#include <string_view>

#include "tsusy/error.hpp"

namespace tsusy::units {

// CODATA 2018, exact to the quoted digits.
inline constexpr double hbar_c_eV_m = 1.973269804e-7;
inline constexpr double hbar_eV_s = 6.582119569e-16;
inline constexpr double c_m_per_s = hbar_c_eV_m / hbar_eV_s;

enum class Unit { eV, inv_eV, s, m, km, eV2 };

enum class Dimension { Energy, Time, Energy2 };

inline Dimension dimension_of(Unit u) {
    switch (u) {
    case Unit::eV: return Dimension::Energy;
    case Unit::eV2: return Dimension::Energy2;
    default: return Dimension::Time;   // lengths are times when c = 1
    }
}

inline Unit parse_unit(std::string_view name) {
    if (name == "eV") return Unit::eV;
    if (name == "eV^-1" || name == "eV-1" || name == "1/eV" || name == "inv_eV") return Unit::inv_eV;
    if (name == "s") return Unit::s;
    if (name == "m") return Unit::m;
    if (name == "km") return Unit::km;
    if (name == "eV^2" || name == "eV2") return Unit::eV2;
    throw Error(ErrorKind::Config, "unknown unit '" + std::string(name) + "'");
}

namespace detail {
// Factor taking one unit of `u` to the canonical unit of its dimension
// (eV, eV^-1, eV^2).
inline double to_canonical(Unit u) {
    switch (u) {
    case Unit::eV:
    case Unit::eV2:
    case Unit::inv_eV: return 1.0;
    case Unit::s: return 1.0 / hbar_eV_s;
    case Unit::m: return 1.0 / hbar_c_eV_m;
    case Unit::km: return 1.0e3 / hbar_c_eV_m;
    }
    return 1.0;
}
} // namespace detail

/// Natural-unit conversion (hbar = c = 1). Times and lengths share a dimension.
inline double convert(double value, Unit from, Unit to) {
    if (dimension_of(from) != dimension_of(to))
        throw Error(ErrorKind::Config, "dimensionally inconsistent conversion");
    if (from == to) return value;
    return value * detail::to_canonical(from) / detail::to_canonical(to);
}

inline double convert(double value, std::string_view from, std::string_view to) {
    return convert(value, parse_unit(from), parse_unit(to));
}

/// Largest distance covered during one sinusoidal mass half-period, L = c*pi/Lambda, in metres.
inline double max_travel_distance_m(double lambda_eV) {
    if (!(lambda_eV > 0.0)) throw Error(ErrorKind::Config, "lambda must be positive");
    return convert(std::numbers::pi / lambda_eV, Unit::inv_eV, Unit::m);
}

} // namespace tsusy::units
