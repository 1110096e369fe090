#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tsusy/approx.hpp"
#include "tsusy/dynamics.hpp"
#include "tsusy/error.hpp"
#include "tsusy/profiles.hpp"
#include "tsusy/quadrature.hpp"

namespace tsusy {

struct MixingConfig {
    double theta = std::numbers::pi / 4;

    void validate() const {
        if (!(theta >= 0.0 && theta <= std::numbers::pi / 2))
            throw Error(ErrorKind::Config, "mixing angle must lie in [0, pi/2]");
    }

    double sin2_2theta() const {
        const double s = std::sin(2 * theta);
        return s * s;
    }

    static MixingConfig from_sin2_2theta(double x) {
        if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::Config, "sin^2(2 theta) must lie in [0, 1]");
        return {std::asin(std::sqrt(x)) / 2};
    }
};

/// Rotation between mass and flavour states. Each entry multiplies a 2x2
/// identity block in the bi-spinor picture.
struct MixingMatrix {
    std::array<std::array<double, 2>, 2> block;

    double determinant() const { return block[0][0] * block[1][1] - block[0][1] * block[1][0]; }

    /// max |M^T M - I|
    double orthogonality_defect() const {
        double worst = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double v = block[0][i] * block[0][j] + block[1][i] * block[1][j];
                worst = std::max(worst, std::abs(v - (i == j ? 1.0 : 0.0)));
            }
        return worst;
    }
};

inline MixingMatrix mix_states(double theta) {
    MixingConfig{theta}.validate();
    const double c = std::cos(theta), s = std::sin(theta);
    return {{{{c, s}, {-s, c}}}};
}

/// sin 2theta [psi+*(0) psi+(t) - psi-*(0) psi-(t)] / 2 with each branch
/// first renormalised so that psi(t0) = 1.
inline std::vector<cplx> transition_amplitude(double theta, const std::vector<cplx>& psi_plus,
                                              const std::vector<cplx>& psi_minus) {
    MixingConfig{theta}.validate();
    if (psi_plus.size() != psi_minus.size()) throw Error(ErrorKind::Config, "mode sequences are misaligned");
    if (psi_plus.empty()) return {};
    if (psi_plus.front() == 0.0 || psi_minus.front() == 0.0)
        throw Error(ErrorKind::Config, "amplitude needs psi(t0) != 0 on both branches");
    const double s = std::sin(2 * theta);
    const cplx p0 = psi_plus.front(), m0 = psi_minus.front();
    std::vector<cplx> amp(psi_plus.size());
    for (std::size_t i = 0; i < amp.size(); ++i) amp[i] = s * (psi_plus[i] / p0 - psi_minus[i] / m0) / 2.0;
    return amp;
}

enum class ProbabilitySource { FromE, ClosedFormMassive, ClosedFormURFull, ClosedFormURReduced };

inline const char* to_string(ProbabilitySource s) {
    switch (s) {
    case ProbabilitySource::FromE: return "from_E";
    case ProbabilitySource::ClosedFormMassive: return "closed_form_massive";
    case ProbabilitySource::ClosedFormURFull: return "closed_form_ur_full";
    case ProbabilitySource::ClosedFormURReduced: return "closed_form_ur_reduced";
    }
    return "?";
}

struct OscillationResult {
    std::vector<double> times;
    std::vector<double> alpha, beta, rho;
    std::vector<double> probability;
    ProbabilitySource source = ProbabilitySource::FromE;
    std::vector<SmallParameter> validity;
    bool applicable = true;
    bool exceeds_unity = false;   // set, never clamped

    std::size_t size() const { return times.size(); }
};

namespace detail {

inline void assemble_probability(OscillationResult& r, double sin2_2theta) {
    r.probability.resize(r.times.size());
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        const double sb = std::sinh(r.beta[i]), sr = std::sin(r.rho[i]);
        r.probability[i] = sin2_2theta * std::exp(-r.alpha[i]) * (sb * sb + sr * sr);
        if (r.probability[i] > 1.0) r.exceeds_unity = true;
    }
}

} // namespace detail

/// P = sin^2 2theta e^-alpha (sinh^2 beta + sin^2 rho) from energies in the
/// oscillation frame (psi = exp(+i int E)), integrated cumulatively from times[0].
inline OscillationResult probability_from_E(double theta, const std::vector<cplx>& E_plus,
                                            const std::vector<cplx>& E_minus, const std::vector<double>& times) {
    const MixingConfig mix{theta};
    mix.validate();
    if (E_plus.size() != times.size() || E_minus.size() != times.size())
        throw Error(ErrorKind::Config, "energy sequences are misaligned with the times");
    if (times.size() < 3) throw Error(ErrorKind::Config, "probability needs at least 3 samples");

    std::vector<double> im_sum(times.size()), im_diff(times.size()), re_diff(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        im_sum[i] = E_minus[i].imag() + E_plus[i].imag();
        im_diff[i] = 0.5 * (E_minus[i].imag() - E_plus[i].imag());
        re_diff[i] = 0.5 * (E_minus[i].real() - E_plus[i].real());
    }
    OscillationResult r;
    r.times = times;
    r.source = ProbabilitySource::FromE;
    r.alpha = cumulative_simpson(times, im_sum);
    r.beta = cumulative_simpson(times, im_diff);
    r.rho = cumulative_simpson(times, re_diff);
    detail::assemble_probability(r, mix.sin2_2theta());
    return r;
}

/// Massive limit: P = sin^2 2theta sin^2(int_{t_ref}^t m).
inline OscillationResult probability_massive(double theta, const MassProfile& profile, const std::vector<double>& times,
                                             double t_ref = 0.0, double k = 0.0) {
    const MixingConfig mix{theta};
    mix.validate();
    OscillationResult r;
    r.times = times;
    r.source = ProbabilitySource::ClosedFormMassive;
    for (double t : times) {
        r.alpha.push_back(0.0);
        r.beta.push_back(0.0);
        r.rho.push_back(profile.integral(t_ref, t));
    }
    const double m0 = profile.mass_scale();
    r.validity.push_back({"k/m0", m0 > 0 ? k / m0 : (k > 0 ? INFINITY : 0.0)});
    r.applicable = all_applicable(r.validity);
    detail::assemble_probability(r, mix.sin2_2theta());
    return r;
}

namespace detail {

inline void require_ur_times(double lambda, const std::vector<double>& times) {
    const double end = std::numbers::pi / lambda;
    for (double t : times)
        if (!(t >= 0.0 && t <= end * (1 + 1e-12)))
            throw Error(ErrorKind::Domain, "ultra-relativistic closed forms hold for 0 <= t <= pi/lambda");
}

inline void require_ur_params(double m0, double lambda, double k) {
    if (!(k > 0.0) || !(lambda > 0.0) || !(m0 >= 0.0))
        throw Error(ErrorKind::Config, "need k > 0, lambda > 0, m0 >= 0");
}

} // namespace detail

/// Ultra-relativistic sinusoidal-mass probability in its published form. The
/// exponent carries the opposite sign to e^-alpha of the general formula;
/// alpha here records minus that exponent.
inline OscillationResult probability_ur_full(double theta, double m0, double lambda, double k,
                                             const std::vector<double>& times) {
    const MixingConfig mix{theta};
    mix.validate();
    detail::require_ur_params(m0, lambda, k);
    detail::ur_pole_guard(k, lambda);
    detail::require_ur_times(lambda, times);
    OscillationResult r;
    r.times = times;
    r.source = ProbabilitySource::ClosedFormURFull;
    const double k2 = k * k, l2 = lambda * lambda;
    for (double t : times) {
        const double c1 = std::cos(lambda * t), c2 = std::cos(2 * lambda * t);
        r.alpha.push_back(-m0 * m0 / (4 * (l2 - k2)) * (c2 - 1));
        r.beta.push_back(2 * k * m0 / (4 * k2 - l2) * std::sin(lambda * t));
        r.rho.push_back(m0 * lambda / (4 * k2 - l2) * (c1 - 1));
    }
    r.validity = {{"m0/k", m0 / k}, {"lambda/k", lambda / k}};
    r.applicable = all_applicable(r.validity);
    detail::assemble_probability(r, mix.sin2_2theta());
    return r;
}

/// Reduced form for lambda << m0 << k: P = sin^2 2theta (m0^2/4k^2) sin^2(lambda t).
inline OscillationResult probability_ur_reduced(double theta, double m0, double lambda, double k,
                                                const std::vector<double>& times) {
    const MixingConfig mix{theta};
    mix.validate();
    detail::require_ur_params(m0, lambda, k);
    detail::require_ur_times(lambda, times);
    OscillationResult r;
    r.times = times;
    r.source = ProbabilitySource::ClosedFormURReduced;
    const double amp = m0 * m0 / (4 * k * k);
    r.probability.reserve(times.size());
    for (double t : times) {
        const double s = std::sin(lambda * t);
        r.alpha.push_back(0.0);
        r.beta.push_back(m0 / (2 * k) * s);
        r.rho.push_back(m0 * lambda / (4 * k * k) * (std::cos(lambda * t) - 1));
        r.probability.push_back(mix.sin2_2theta() * amp * s * s);
    }
    r.validity = {{"m0/k", m0 / k}, {"lambda/m0", m0 > 0 ? lambda / m0 : INFINITY}};
    r.applicable = all_applicable(r.validity);
    return r;
}

enum class ClosedFormMode { Massive, URFull, URReduced };

struct ClosedFormInput {
    MassProfile profile = MassProfile::constant(0.0);   // Massive
    double m0 = 0.0, lambda = 0.0, k = 0.0;              // ultra-relativistic forms
};

inline OscillationResult probability_closed_form(ClosedFormMode mode, double theta, const ClosedFormInput& in,
                                                 const std::vector<double>& times) {
    switch (mode) {
    case ClosedFormMode::Massive: return probability_massive(theta, in.profile, times, 0.0, in.k);
    case ClosedFormMode::URFull: return probability_ur_full(theta, in.m0, in.lambda, in.k, times);
    case ClosedFormMode::URReduced: return probability_ur_reduced(theta, in.m0, in.lambda, in.k, times);
    }
    throw Error(ErrorKind::Config, "unknown closed-form mode");
}

/// Probability pipeline on a dynamics trajectory.
inline OscillationResult probability_from_trajectory(double theta, const ModeTrajectory& tr) {
    const auto frame = frame_of(tr.params.convention);
    return probability_from_E(theta, to_oscillation_frame(frame, tr.E_plus), to_oscillation_frame(frame, tr.E_minus),
                              tr.times);
}

} // namespace tsusy
