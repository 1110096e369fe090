#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "tsusy/error.hpp"

namespace tsusy {

/// Square banded matrix with `lower` sub-diagonals and `upper` super-diagonals,
/// stored row-wise.
template <class T>
class BandedMatrix {
public:
    using value_type = T;

    BandedMatrix() = default;

    BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
        : n_(n), lower_(std::min(lower, n ? n - 1 : 0)), upper_(std::min(upper, n ? n - 1 : 0)),
          data_(n * (lower_ + upper_ + 1), T{}) {}

    static BandedMatrix identity(std::size_t n) {
        BandedMatrix m(n, 0, 0);
        for (std::size_t i = 0; i < n; ++i) m.ref(i, i) = T{1};
        return m;
    }

    static BandedMatrix diagonal(std::span<const T> d) {
        BandedMatrix m(d.size(), 0, 0);
        for (std::size_t i = 0; i < d.size(); ++i) m.ref(i, i) = d[i];
        return m;
    }

    std::size_t size() const { return n_; }
    std::size_t lower() const { return lower_; }
    std::size_t upper() const { return upper_; }

    bool in_band(std::size_t i, std::size_t j) const {
        return j + lower_ >= i && j <= i + upper_;
    }

    T operator()(std::size_t i, std::size_t j) const {
        return in_band(i, j) ? data_[index(i, j)] : T{};
    }

    T& ref(std::size_t i, std::size_t j) {
        if (!in_band(i, j)) throw Error(ErrorKind::Config, "banded matrix: entry outside band");
        return data_[index(i, j)];
    }

    std::size_t col_begin(std::size_t i) const { return i > lower_ ? i - lower_ : 0; }
    std::size_t col_end(std::size_t i) const { return std::min(n_, i + upper_ + 1); }

    /// Smallest band that holds every nonzero entry.
    BandedMatrix trimmed() const {
        std::size_t lo = 0, up = 0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = col_begin(i); j < col_end(i); ++j)
                if ((*this)(i, j) != T{}) {
                    if (j < i) lo = std::max(lo, i - j);
                    else up = std::max(up, j - i);
                }
        BandedMatrix out(n_, lo, up);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = out.col_begin(i); j < out.col_end(i); ++j) out.ref(i, j) = (*this)(i, j);
        return out;
    }

    /// Maximum absolute row sum (induced infinity norm).
    double norm_inf() const {
        double best = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double row = 0.0;
            for (std::size_t j = col_begin(i); j < col_end(i); ++j) row += std::abs((*this)(i, j));
            best = std::max(best, row);
        }
        return best;
    }

    template <class U>
    auto apply(std::span<const U> v) const {
        using R = std::common_type_t<T, U>;
        if (v.size() != n_) throw Error(ErrorKind::Config, "banded matrix: vector length mismatch");
        std::vector<R> out(n_, R{});
        for (std::size_t i = 0; i < n_; ++i) {
            R acc{};
            for (std::size_t j = col_begin(i); j < col_end(i); ++j) acc += R((*this)(i, j)) * R(v[j]);
            out[i] = acc;
        }
        return out;
    }

    template <class U>
    auto apply(const std::vector<U>& v) const { return apply(std::span<const U>(v)); }

    friend BandedMatrix operator*(const BandedMatrix& a, const BandedMatrix& b) {
        a.require_same_size(b);
        BandedMatrix c(a.n_, a.lower_ + b.lower_, a.upper_ + b.upper_);
        for (std::size_t i = 0; i < a.n_; ++i)
            for (std::size_t k = a.col_begin(i); k < a.col_end(i); ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = b.col_begin(k); j < b.col_end(k); ++j) c.ref(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend BandedMatrix operator+(const BandedMatrix& a, const BandedMatrix& b) { return combine(a, b, T{1}); }
    friend BandedMatrix operator-(const BandedMatrix& a, const BandedMatrix& b) { return combine(a, b, T{-1}); }

    friend BandedMatrix operator*(T s, BandedMatrix m) {
        for (auto& x : m.data_) x *= s;
        return m;
    }

private:
    std::size_t index(std::size_t i, std::size_t j) const {
        return i * (lower_ + upper_ + 1) + (j + lower_ - i);
    }

    void require_same_size(const BandedMatrix& other) const {
        if (n_ != other.n_) throw Error(ErrorKind::Config, "banded matrix: dimension mismatch");
    }

    static BandedMatrix combine(const BandedMatrix& a, const BandedMatrix& b, T sign) {
        a.require_same_size(b);
        BandedMatrix c(a.n_, std::max(a.lower_, b.lower_), std::max(a.upper_, b.upper_));
        for (std::size_t i = 0; i < a.n_; ++i) {
            for (std::size_t j = a.col_begin(i); j < a.col_end(i); ++j) c.ref(i, j) += a(i, j);
            for (std::size_t j = b.col_begin(i); j < b.col_end(i); ++j) c.ref(i, j) += sign * b(i, j);
        }
        return c;
    }

    std::size_t n_ = 0;
    std::size_t lower_ = 0;
    std::size_t upper_ = 0;
    std::vector<T> data_;
};

} // namespace tsusy
