#pragma once

#include <stdexcept>
#include <string>

namespace tsusy {

enum class ErrorKind {
    Domain,       // time outside a profile's declared domain
    Pole,         // evaluation at a singular point of a formula
    Config,       // invalid parameters or input
    Tolerance,    // integrator / quadrature could not meet tolerance
    Underflow,    // mode amplitude left the representable range
    Hierarchy,    // scale separation too large for direct integration
    Io
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::Config: return "config";
    case ErrorKind::Tolerance: return "tolerance";
    case ErrorKind::Underflow: return "underflow";
    case ErrorKind::Hierarchy: return "hierarchy";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Numerical failures map to exit code 3, everything else the caller decides.
    bool is_numerical() const noexcept {
        return kind_ == ErrorKind::Tolerance || kind_ == ErrorKind::Underflow ||
               kind_ == ErrorKind::Pole;
    }

private:
    ErrorKind kind_;
};

} // namespace tsusy
