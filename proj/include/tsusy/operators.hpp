#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tsusy/banded.hpp"
#include "tsusy/error.hpp"
#include "tsusy/profiles.hpp"

namespace tsusy {

/// Uniform time grid with n_points nodes including both ends.
class TimeGrid {
public:
    TimeGrid(double t_start, double t_end, std::size_t n_points)
        : t_start_(t_start), t_end_(t_end), n_(n_points) {
        if (!(t_end > t_start)) throw Error(ErrorKind::Config, "time grid: t_end must exceed t_start");
        if (n_points < 8) throw Error(ErrorKind::Config, "time grid: need at least 8 points");
    }

    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    std::size_t size() const { return n_; }
    double spacing() const { return (t_end_ - t_start_) / static_cast<double>(n_ - 1); }
    double time(std::size_t i) const { return i + 1 == n_ ? t_end_ : t_start_ + spacing() * static_cast<double>(i); }

    std::vector<double> times() const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = time(i);
        return out;
    }

    bool operator==(const TimeGrid&) const = default;

private:
    double t_start_;
    double t_end_;
    std::size_t n_;
};

enum class Scheme { Forward, Central };
enum class OperatorLabel { QPlus, QMinus, HPlus, HMinus, D, D2 };

struct GridOperator {
    BandedMatrix<double> matrix;
    Scheme scheme;
    OperatorLabel label;
    TimeGrid grid;
};

/// First-difference matrix. Boundary rows are one-sided (forward at the
/// start, backward at the end); interior rows follow the scheme.
inline GridOperator difference_operator(const TimeGrid& grid, Scheme scheme) {
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    BandedMatrix<double> d(n, 1, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 == n) {
            d.ref(i, i - 1) = -1.0 / h;
            d.ref(i, i) = 1.0 / h;
        } else if (scheme == Scheme::Forward || i == 0) {
            d.ref(i, i) = -1.0 / h;
            d.ref(i, i + 1) = 1.0 / h;
        } else {
            d.ref(i, i - 1) = -0.5 / h;
            d.ref(i, i + 1) = 0.5 / h;
        }
    }
    return {d.trimmed(), scheme, OperatorLabel::D, grid};
}

/// D2 = D * D, the second derivative implied by Q-Q+ with m = 0.
inline GridOperator second_difference_operator(const TimeGrid& grid, Scheme scheme) {
    const auto d = difference_operator(grid, scheme);
    return {(d.matrix * d.matrix).trimmed(), scheme, OperatorLabel::D2, grid};
}

inline std::vector<double> sample_mass(const TimeGrid& grid, const MassProfile& profile) {
    std::vector<double> m(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) m[i] = evaluate_profile(profile, grid.time(i)).mass;
    return m;
}

/// Q+- = D -+ diag(m(t_i)).
inline std::pair<GridOperator, GridOperator> build_charge_operators(const TimeGrid& grid,
                                                                    const MassProfile& profile,
                                                                    Scheme scheme) {
    const auto d = difference_operator(grid, scheme);
    const auto m = sample_mass(grid, profile);
    const auto mass = BandedMatrix<double>::diagonal(m);
    return {GridOperator{(d.matrix - mass).trimmed(), scheme, OperatorLabel::QPlus, grid},
            GridOperator{(d.matrix + mass).trimmed(), scheme, OperatorLabel::QMinus, grid}};
}

inline void require_charge_pair(const GridOperator& q_plus, const GridOperator& q_minus) {
    if (q_plus.label != OperatorLabel::QPlus || q_minus.label != OperatorLabel::QMinus)
        throw Error(ErrorKind::Config, "expected a (Q+, Q-) pair");
    if (!(q_plus.grid == q_minus.grid) || q_plus.matrix.size() != q_minus.matrix.size())
        throw Error(ErrorKind::Config, "charge operators live on different grids");
}

/// H+ = Q- Q+ and H- = Q+ Q-; never assembled any other way.
inline std::pair<GridOperator, GridOperator> partner_hamiltonians(const GridOperator& q_plus,
                                                                  const GridOperator& q_minus) {
    require_charge_pair(q_plus, q_minus);
    return {GridOperator{(q_minus.matrix * q_plus.matrix).trimmed(), q_plus.scheme, OperatorLabel::HPlus,
                         q_plus.grid},
            GridOperator{(q_plus.matrix * q_minus.matrix).trimmed(), q_plus.scheme, OperatorLabel::HMinus,
                         q_plus.grid}};
}

// ---------------------------------------------------------------------------
// Super-algebra on 2x2 block operators. Absent blocks are exact zeros.

class BlockOperator {
public:
    using Block = std::optional<BandedMatrix<double>>;

    explicit BlockOperator(std::size_t n) : n_(n) {}

    std::size_t block_size() const { return n_; }
    Block& at(int r, int c) { return blocks_[static_cast<std::size_t>(2 * r + c)]; }
    const Block& at(int r, int c) const { return blocks_[static_cast<std::size_t>(2 * r + c)]; }

    friend BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
        BlockOperator out(a.n_);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                for (int k = 0; k < 2; ++k) {
                    const auto& x = a.at(r, k);
                    const auto& y = b.at(k, c);
                    if (!x || !y) continue;
                    auto prod = *x * *y;
                    out.at(r, c) = out.at(r, c) ? *out.at(r, c) + prod : std::move(prod);
                }
        return out;
    }

    friend BlockOperator operator+(const BlockOperator& a, const BlockOperator& b) { return combine(a, b, 1.0); }
    friend BlockOperator operator-(const BlockOperator& a, const BlockOperator& b) { return combine(a, b, -1.0); }

    /// Infinity norm of the assembled 2n x 2n matrix.
    double norm_inf() const {
        double best = 0.0;
        for (int r = 0; r < 2; ++r)
            for (std::size_t i = 0; i < n_; ++i) {
                double row = 0.0;
                for (int c = 0; c < 2; ++c) {
                    const auto& blk = at(r, c);
                    if (!blk) continue;
                    for (std::size_t j = blk->col_begin(i); j < blk->col_end(i); ++j) row += std::abs((*blk)(i, j));
                }
                best = std::max(best, row);
            }
        return best;
    }

private:
    static BlockOperator combine(const BlockOperator& a, const BlockOperator& b, double sign) {
        BlockOperator out(a.n_);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                const auto& x = a.at(r, c);
                const auto& y = b.at(r, c);
                if (x && y) out.at(r, c) = *x + sign * *y;
                else if (x) out.at(r, c) = *x;
                else if (y) out.at(r, c) = sign * *y;
            }
        return out;
    }

    std::size_t n_;
    std::array<Block, 4> blocks_;
};

struct AlgebraResiduals {
    double anticommutator_residual;   // ||{Q, Q+} - H||
    double commutator_residual;       // max(||[H, Q]||, ||[H, Q+]||)
    double nilpotency_residual;       // max(||{Q, Q}||, ||{Q+, Q+}||)
    double h_norm;
    double q_norm;
};

/// Residuals of H = {Q, Q^dag}, [H, Q] = [H, Q^dag] = 0, {Q, Q} = {Q^dag, Q^dag} = 0
/// with H = diag(Q-Q+, Q+Q-), Q = [[0,0],[Q+,0]], Q^dag = [[0,Q-],[0,0]].
inline AlgebraResiduals algebra_residuals(const GridOperator& q_plus, const GridOperator& q_minus) {
    require_charge_pair(q_plus, q_minus);
    const auto [h_plus, h_minus] = partner_hamiltonians(q_plus, q_minus);
    const std::size_t n = q_plus.matrix.size();

    BlockOperator h(n), q(n), qd(n);
    h.at(0, 0) = h_plus.matrix;
    h.at(1, 1) = h_minus.matrix;
    q.at(1, 0) = q_plus.matrix;
    qd.at(0, 1) = q_minus.matrix;

    const auto anti = q * qd + qd * q - h;
    const auto comm = std::max((h * q - q * h).norm_inf(), (h * qd - qd * h).norm_inf());
    const auto nil = std::max((q * q + q * q).norm_inf(), (qd * qd + qd * qd).norm_inf());
    return {anti.norm_inf(), comm, nil, h.norm_inf(), std::max(q.norm_inf(), qd.norm_inf())};
}

// ---------------------------------------------------------------------------

namespace detail {
// Rows closer than this to either edge carry one-sided stencils in D2.
inline constexpr std::size_t boundary_rows = 2;

template <class T>
double interior_sup(const std::vector<T>& v, std::size_t edge = boundary_rows) {
    double best = 0.0;
    for (std::size_t i = edge; i + edge < v.size(); ++i) best = std::max(best, std::abs(v[i]));
    return best;
}
} // namespace detail

/// ||H psi - k^2 psi|| / ||psi|| over rows at least `edge` away from either end.
inline double eigen_residual(const GridOperator& hamiltonian, std::span<const std::complex<double>> psi, double k,
                             std::size_t edge = detail::boundary_rows) {
    const auto h_psi = hamiltonian.matrix.apply(psi);
    std::vector<std::complex<double>> diff(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) diff[i] = h_psi[i] - k * k * psi[i];
    const std::vector<std::complex<double>> values(psi.begin(), psi.end());
    const double scale = detail::interior_sup(values, edge);
    return scale == 0.0 ? 0.0 : detail::interior_sup(diff, edge) / scale;
}

enum class PartnerDirection { PlusToMinus, MinusToPlus };

struct PartnerResult {
    std::vector<std::complex<double>> partner;
    double eigen_residual;
};

/// partner = Q+- psi / k, checked against H-+ partner = k^2 partner.
inline PartnerResult intertwine_partner(const TimeGrid& grid, const MassProfile& profile,
                                        std::span<const std::complex<double>> psi, double k,
                                        PartnerDirection direction, Scheme scheme = Scheme::Forward) {
    if (k == 0.0) throw Error(ErrorKind::Config, "intertwining requires k != 0");
    if (psi.size() != grid.size()) throw Error(ErrorKind::Config, "sampled function does not match the grid");
    const auto [q_plus, q_minus] = build_charge_operators(grid, profile, scheme);
    const auto [h_plus, h_minus] = partner_hamiltonians(q_plus, q_minus);
    const bool forward = direction == PartnerDirection::PlusToMinus;
    const auto& charge = forward ? q_plus : q_minus;
    const auto& target = forward ? h_minus : h_plus;

    auto partner = charge.matrix.apply(psi);
    for (auto& x : partner) x /= k;
    // The one-sided last row of Q leaks one row further into H Q psi.
    const double residual = eigen_residual(target, partner, k, detail::boundary_rows + 1);
    return {std::move(partner), residual};
}

/// ||(H+ - (D2 + diag W+)) v|| over interior rows for a test function v.
inline double hamiltonian_consistency_error(const TimeGrid& grid, const MassProfile& profile, Scheme scheme,
                                            const std::function<double(double)>& test_function) {
    const auto [q_plus, q_minus] = build_charge_operators(grid, profile, scheme);
    const auto [h_plus, h_minus] = partner_hamiltonians(q_plus, q_minus);
    const auto d2 = second_difference_operator(grid, scheme);
    std::vector<double> v(grid.size()), w(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = test_function(grid.time(i));
        w[i] = superpotentials(profile, grid.time(i)).w_plus;
    }
    const auto reference = (d2.matrix + BandedMatrix<double>::diagonal(w)).apply(v);
    const auto actual = h_plus.matrix.apply(v);
    std::vector<double> diff(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) diff[i] = actual[i] - reference[i];
    return detail::interior_sup(diff);
}

/// Least-squares slope of log(error) against log(spacing).
inline double observed_order(std::span<const double> spacing, std::span<const double> error) {
    if (spacing.size() != error.size() || spacing.size() < 2)
        throw Error(ErrorKind::Config, "order fit needs at least two (h, error) pairs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(spacing.size());
    for (std::size_t i = 0; i < spacing.size(); ++i) {
        const double x = std::log(spacing[i]), y = std::log(error[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace tsusy
