#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "floquet_avg/error.hpp"

namespace floquet {

inline constexpr std::size_t max_dimension = 8;

/**
 * Dense square matrix of small dimension (n <= 8), row-major.
 *
 * Value type; every operation returns a new matrix. The scalar parameter
 * exists so that the whole averaging pipeline can be rerun in extended
 * precision when roundoff matters.
 */
template <std::floating_point Real = double>
class BasicMat {
  public:
    using value_type = Real;

    BasicMat() : BasicMat(1) {}

    explicit BasicMat(std::size_t n) : n_(n), a_(n * n, Real(0)) {
        if (n == 0 || n > max_dimension) {
            throw ValidationError("matrix dimension must be in 1.." +
                                  std::to_string(max_dimension) + ", got " + std::to_string(n));
        }
    }

    BasicMat(std::initializer_list<std::initializer_list<Real>> rows) : BasicMat(rows.size()) {
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != n_) throw ValidationError("matrix rows must form a square");
            std::copy(row.begin(), row.end(), a_.begin() + static_cast<std::ptrdiff_t>(i * n_));
            ++i;
        }
    }

    static BasicMat identity(std::size_t n) {
        BasicMat m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1);
        return m;
    }
    static BasicMat zeros(std::size_t n) { return BasicMat(n); }

    template <std::floating_point Other>
    static BasicMat cast(const BasicMat<Other>& o) {
        BasicMat m(o.dim());
        for (std::size_t k = 0; k < o.data().size(); ++k) m.a_[k] = static_cast<Real>(o.data()[k]);
        return m;
    }

    std::size_t dim() const noexcept { return n_; }
    Real& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
    Real operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
    std::span<const Real> data() const noexcept { return a_; }
    std::span<Real> data() noexcept { return a_; }

    BasicMat& operator+=(const BasicMat& o) {
        check_same(o);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    BasicMat& operator-=(const BasicMat& o) {
        check_same(o);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    BasicMat& operator*=(Real s) noexcept {
        for (auto& x : a_) x *= s;
        return *this;
    }

    friend BasicMat operator+(BasicMat a, const BasicMat& b) { return a += b; }
    friend BasicMat operator-(BasicMat a, const BasicMat& b) { return a -= b; }
    friend BasicMat operator-(BasicMat a) { return a *= Real(-1); }
    friend BasicMat operator*(BasicMat a, Real s) { return a *= s; }
    friend BasicMat operator*(Real s, BasicMat a) { return a *= s; }

    friend BasicMat operator*(const BasicMat& a, const BasicMat& b) {
        a.check_same(b);
        const std::size_t n = a.n_;
        BasicMat c(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const Real aik = a(i, k);
                if (aik == Real(0)) continue;
                for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend bool operator==(const BasicMat&, const BasicMat&) = default;

  private:
    void check_same(const BasicMat& o) const {
        if (o.n_ != n_) {
            throw ValidationError("matrix dimension mismatch: " + std::to_string(n_) + " vs " +
                                  std::to_string(o.n_));
        }
    }

    std::size_t n_;
    std::vector<Real> a_;
};

using Mat = BasicMat<double>;

/// Maximum absolute column sum.
template <class Real>
Real norm1(const BasicMat<Real>& m) {
    Real best = 0;
    for (std::size_t j = 0; j < m.dim(); ++j) {
        Real s = 0;
        for (std::size_t i = 0; i < m.dim(); ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

template <class Real>
Real max_abs(const BasicMat<Real>& m) {
    Real best = 0;
    for (Real x : m.data()) best = std::max(best, std::abs(x));
    return best;
}

template <class Real>
Real trace(const BasicMat<Real>& m) {
    Real s = 0;
    for (std::size_t i = 0; i < m.dim(); ++i) s += m(i, i);
    return s;
}

template <class Real>
bool is_finite(const BasicMat<Real>& m) {
    return std::all_of(m.data().begin(), m.data().end(), [](Real x) { return std::isfinite(x); });
}

/// Determinant. 2x2 uses a compensated ad - bc; larger sizes use partial pivoting.
template <class Real>
Real det(const BasicMat<Real>& m) {
    const std::size_t n = m.dim();
    if (n == 1) return m(0, 0);
    if (n == 2) {
        // Kahan's difference of products.
        const Real w = m(0, 1) * m(1, 0);
        const Real e = std::fma(-m(0, 1), m(1, 0), w);
        const Real f = std::fma(m(0, 0), m(1, 1), -w);
        return f + e;
    }
    BasicMat<Real> a = m;
    Real d = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
        if (a(p, c) == Real(0)) return Real(0);
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(c, j));
            d = -d;
        }
        d *= a(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            const Real f = a(r, c) / a(c, c);
            for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
        }
    }
    return d;
}

template <class Real>
BasicMat<Real> power(const BasicMat<Real>& m, unsigned k) {
    auto r = BasicMat<Real>::identity(m.dim());
    for (unsigned i = 0; i < k; ++i) r = r * m;
    return r;
}

/**
 * exp(M t) by scaling and squaring.
 *
 * The scaled matrix has 1-norm at most 0.5; its Taylor series is summed until
 * the next term drops below 2^-53 of the partial sum (at most 30 terms), then
 * squared back. Throws ValidationError on non-finite input and RangeError when
 * ||M t||_1 exceeds 1e6.
 */
template <class Real>
BasicMat<Real> matexp(const BasicMat<Real>& m, Real t) {
    if (!std::isfinite(t) || !is_finite(m)) throw ValidationError("matexp: non-finite input");
    const std::size_t n = m.dim();
    BasicMat<Real> a = m * t;
    const Real norm = norm1(a);
    if (norm > Real(1e6)) {
        throw RangeError("matexp: ||M t||_1 = " + std::to_string(static_cast<double>(norm)) +
                         " exceeds the overflow guard 1e6");
    }
    int s = 0;
    Real scaled = norm;
    while (scaled > Real(0.5)) {
        scaled /= 2;
        ++s;
    }
    a *= std::ldexp(Real(1), -s);

    auto sum = BasicMat<Real>::identity(n);
    auto term = sum;
    const Real stop = std::ldexp(Real(1), -53);
    for (int k = 1; k <= 30; ++k) {
        term = term * a;
        term *= Real(1) / Real(k);
        sum += term;
        if (norm1(term) < stop * norm1(sum)) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

template <class Real>
struct RootPair {
    std::complex<Real> first;
    std::complex<Real> second;
};

/// Roots of rho^2 - tr(F) rho + det(F); the larger-magnitude root comes first.
template <class Real>
RootPair<Real> char_roots_2x2(const BasicMat<Real>& f) {
    if (f.dim() != 2) throw ValidationError("char_roots_2x2 requires a 2x2 matrix");
    if (!is_finite(f)) throw ValidationError("char_roots_2x2: non-finite matrix");
    const Real tr = trace(f);
    const Real d = det(f);
    const Real half = tr / 2;
    const Real disc = std::fma(half, half, -d);
    if (disc < 0) {
        const Real im = std::sqrt(-disc);
        return {{half, im}, {half, -im}};
    }
    const Real q = half + std::copysign(std::sqrt(disc), half);
    if (q == Real(0)) return {{0, 0}, {0, 0}};
    return {{q, 0}, {d / q, 0}};
}

}  // namespace floquet
