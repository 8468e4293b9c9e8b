#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "floquet_avg/error.hpp"
#include "floquet_avg/smallmat.hpp"

namespace floquet {

inline constexpr std::size_t max_poly_degree = 64;

/// Polynomial in the global time variable t, coefficients in ascending degree.
template <class Real>
using Poly = std::vector<Real>;

namespace poly {

template <class Real>
void trim(Poly<Real>& p) {
    while (p.size() > 1 && p.back() == Real(0)) p.pop_back();
}

template <class Real>
Real eval(const Poly<Real>& p, Real t) {
    Real r = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * t + *it;
    return r;
}

template <class Real>
void add_into(Poly<Real>& acc, const Poly<Real>& p, Real scale = Real(1)) {
    if (acc.size() < p.size()) acc.resize(p.size(), Real(0));
    for (std::size_t i = 0; i < p.size(); ++i) acc[i] += scale * p[i];
}

template <class Real>
void mul_add_into(Poly<Real>& acc, const Poly<Real>& a, const Poly<Real>& b) {
    if (a.empty() || b.empty()) return;
    const std::size_t deg = a.size() + b.size() - 2;
    if (deg > max_poly_degree) {
        throw OrderTooHighError("polynomial degree " + std::to_string(deg) + " exceeds cap " +
                                std::to_string(max_poly_degree));
    }
    if (acc.size() < deg + 1) acc.resize(deg + 1, Real(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == Real(0)) continue;
        for (std::size_t j = 0; j < b.size(); ++j) acc[i + j] += a[i] * b[j];
    }
}

/// Antiderivative vanishing at t = 0.
template <class Real>
Poly<Real> integral(const Poly<Real>& p) {
    if (p.size() > max_poly_degree) {
        throw OrderTooHighError("polynomial degree " + std::to_string(p.size()) + " exceeds cap " +
                                std::to_string(max_poly_degree));
    }
    Poly<Real> r(p.size() + 1, Real(0));
    for (std::size_t i = 0; i < p.size(); ++i) r[i + 1] = p[i] / Real(i + 1);
    return r;
}

}  // namespace poly

/**
 * T-periodic matrix function, polynomial in t between breakpoints
 * 0 = t_0 < t_1 < ... < t_m = T. Piece k covers [t_k, t_{k+1}); evaluation
 * is right-continuous and t = T belongs to the last piece.
 */
template <std::floating_point Real = double>
class BasicPiecewisePolyMatrix {
  public:
    using Mat = BasicMat<Real>;
    using Piece = std::vector<Poly<Real>>;  // n*n entries, row-major

    BasicPiecewisePolyMatrix(Real period, std::vector<Real> breakpoints, std::size_t n,
                             std::vector<Piece> pieces)
        : period_(period), breaks_(std::move(breakpoints)), n_(n), pieces_(std::move(pieces)) {
        validate();
    }

    static BasicPiecewisePolyMatrix constant(const Mat& c, Real period) {
        Piece p(c.dim() * c.dim());
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = {c.data()[k]};
        return BasicPiecewisePolyMatrix(period, {Real(0), period}, c.dim(), {std::move(p)});
    }

    static BasicPiecewisePolyMatrix zero(std::size_t n, Real period) {
        return constant(Mat(n), period);
    }

    /// Piecewise-constant function from consecutive (duration, value) segments.
    static BasicPiecewisePolyMatrix piecewise_constant(
        std::span<const std::pair<Real, Mat>> segments) {
        if (segments.empty()) throw ValidationError("piecewise_constant: no segments");
        const std::size_t n = segments.front().second.dim();
        std::vector<Real> breaks{Real(0)};
        std::vector<Piece> pieces;
        for (const auto& [duration, value] : segments) {
            if (value.dim() != n) throw ValidationError("piecewise_constant: dimension mismatch");
            breaks.push_back(breaks.back() + duration);
            Piece p(n * n);
            for (std::size_t k = 0; k < p.size(); ++k) p[k] = {value.data()[k]};
            pieces.push_back(std::move(p));
        }
        const Real period = breaks.back();
        return BasicPiecewisePolyMatrix(period, std::move(breaks), n, std::move(pieces));
    }

    Real period() const noexcept { return period_; }
    std::size_t dim() const noexcept { return n_; }
    std::size_t piece_count() const noexcept { return pieces_.size(); }
    std::span<const Real> breakpoints() const noexcept { return breaks_; }
    const Piece& piece(std::size_t k) const { return pieces_.at(k); }
    const Poly<Real>& entry(std::size_t k, std::size_t i, std::size_t j) const {
        return pieces_.at(k).at(i * n_ + j);
    }

    std::size_t max_degree() const noexcept {
        std::size_t d = 0;
        for (const auto& pc : pieces_)
            for (const auto& p : pc) d = std::max(d, p.empty() ? 0 : p.size() - 1);
        return d;
    }

    Real max_abs_coefficient() const noexcept {
        Real m = 0;
        for (const auto& pc : pieces_)
            for (const auto& p : pc)
                for (Real c : p) m = std::max(m, std::abs(c));
        return m;
    }

    bool is_piecewise_constant() const noexcept { return max_degree() == 0; }

    /// Index of the piece containing t (right-continuous, t = T in the last piece).
    std::size_t piece_index(Real t) const {
        if (!(t >= Real(0) && t <= period_)) {
            throw RangeError("time " + std::to_string(static_cast<double>(t)) +
                             " outside [0, T]; reduce modulo the period first");
        }
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
        auto k = static_cast<std::size_t>(it - breaks_.begin());
        return std::min(k == 0 ? 0 : k - 1, pieces_.size() - 1);
    }

    /// Evaluate piece k's polynomials at t; t need not lie in that piece.
    Mat eval_piece(std::size_t k, Real t) const {
        Mat m(n_);
        const auto& pc = pieces_.at(k);
        for (std::size_t e = 0; e < pc.size(); ++e) m.data()[e] = poly::eval(pc[e], t);
        return m;
    }

    Mat eval(Real t) const { return eval_piece(piece_index(t), t); }

    /// Same function over a finer set of breakpoints (must contain the current ones).
    BasicPiecewisePolyMatrix refined(std::span<const Real> breaks) const {
        std::vector<Piece> pieces;
        pieces.reserve(breaks.size() - 1);
        for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
            const Real mid = breaks[k] + (breaks[k + 1] - breaks[k]) / 2;
            pieces.push_back(pieces_[piece_index(mid)]);
        }
        return BasicPiecewisePolyMatrix(period_, {breaks.begin(), breaks.end()}, n_,
                                        std::move(pieces));
    }

  private:
    void validate() {
        if (!(period_ > Real(0)) || !std::isfinite(period_))
            throw ValidationError("period must be positive and finite");
        if (breaks_.size() < 2 || breaks_.size() != pieces_.size() + 1)
            throw ValidationError("need m+1 breakpoints for m pieces");
        if (breaks_.front() != Real(0)) throw ValidationError("first breakpoint must be 0");
        if (std::abs(breaks_.back() - period_) > Real(1e-12) * period_)
            throw ValidationError("last breakpoint must equal the period");
        breaks_.back() = period_;
        for (std::size_t k = 0; k + 1 < breaks_.size(); ++k)
            if (!(breaks_[k] < breaks_[k + 1]))
                throw ValidationError("breakpoints must be strictly increasing");
        if (n_ == 0 || n_ > max_dimension) throw ValidationError("bad matrix dimension");
        for (auto& pc : pieces_) {
            if (pc.size() != n_ * n_) throw ValidationError("piece has wrong number of entries");
            for (auto& p : pc) {
                if (p.empty()) p.push_back(Real(0));
                if (p.size() - 1 > max_poly_degree)
                    throw OrderTooHighError("polynomial degree exceeds cap " +
                                            std::to_string(max_poly_degree));
                for (Real c : p)
                    if (!std::isfinite(c)) throw ValidationError("non-finite coefficient");
            }
        }
    }

    Real period_;
    std::vector<Real> breaks_;
    std::size_t n_;
    std::vector<Piece> pieces_;
};

using PiecewisePolyMatrix = BasicPiecewisePolyMatrix<double>;

namespace detail {

/// Sorted union of two breakpoint sets; points closer than 1e-12 T are merged.
template <class Real>
std::vector<Real> merge_breaks(std::span<const Real> a, std::span<const Real> b, Real period) {
    std::vector<Real> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    std::vector<Real> out;
    const Real gap = Real(1e-12) * period;
    for (Real x : all)
        if (out.empty() || x - out.back() > gap) out.push_back(x);
    out.back() = period;
    return out;
}

template <class Real>
void check_compatible(const BasicPiecewisePolyMatrix<Real>& a,
                      const BasicPiecewisePolyMatrix<Real>& b) {
    if (a.dim() != b.dim()) throw ValidationError("ppoly dimension mismatch");
    if (std::abs(a.period() - b.period()) > Real(1e-12) * a.period())
        throw ValidationError("ppoly period mismatch");
}

template <class Real, class Op>
BasicPiecewisePolyMatrix<Real> combine(const BasicPiecewisePolyMatrix<Real>& a,
                                       const BasicPiecewisePolyMatrix<Real>& b, Op op) {
    check_compatible(a, b);
    const auto breaks = merge_breaks(a.breakpoints(), b.breakpoints(), a.period());
    const auto ra = a.refined(breaks);
    const auto rb = b.refined(breaks);
    std::vector<typename BasicPiecewisePolyMatrix<Real>::Piece> pieces;
    pieces.reserve(ra.piece_count());
    for (std::size_t k = 0; k < ra.piece_count(); ++k) pieces.push_back(op(ra.piece(k), rb.piece(k)));
    return BasicPiecewisePolyMatrix<Real>(a.period(), breaks, a.dim(), std::move(pieces));
}

}  // namespace detail

template <class Real>
BasicPiecewisePolyMatrix<Real> pp_add(const BasicPiecewisePolyMatrix<Real>& a,
                                      const BasicPiecewisePolyMatrix<Real>& b, Real b_scale = 1) {
    return detail::combine(a, b, [b_scale](const auto& pa, const auto& pb) {
        auto out = pa;
        for (std::size_t e = 0; e < out.size(); ++e) {
            poly::add_into(out[e], pb[e], b_scale);
            poly::trim(out[e]);
        }
        return out;
    });
}

template <class Real>
BasicPiecewisePolyMatrix<Real> pp_sub(const BasicPiecewisePolyMatrix<Real>& a,
                                      const BasicPiecewisePolyMatrix<Real>& b) {
    return pp_add(a, b, Real(-1));
}

/// Pointwise matrix product; breakpoints are the union of both inputs'.
template <class Real>
BasicPiecewisePolyMatrix<Real> pp_mul(const BasicPiecewisePolyMatrix<Real>& a,
                                      const BasicPiecewisePolyMatrix<Real>& b) {
    const std::size_t n = a.dim();
    return detail::combine(a, b, [n](const auto& pa, const auto& pb) {
        typename BasicPiecewisePolyMatrix<Real>::Piece out(n * n, Poly<Real>{Real(0)});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                auto& acc = out[i * n + j];
                for (std::size_t k = 0; k < n; ++k) poly::mul_add_into(acc, pa[i * n + k], pb[k * n + j]);
                poly::trim(acc);
            }
        return out;
    });
}

/// t -> integral from 0 to t, continuous across breakpoints.
template <class Real>
BasicPiecewisePolyMatrix<Real> pp_antiderivative(const BasicPiecewisePolyMatrix<Real>& a) {
    const std::size_t n = a.dim();
    const auto breaks = a.breakpoints();
    std::vector<typename BasicPiecewisePolyMatrix<Real>::Piece> pieces;
    pieces.reserve(a.piece_count());
    std::vector<Real> running(n * n, Real(0));
    for (std::size_t k = 0; k < a.piece_count(); ++k) {
        typename BasicPiecewisePolyMatrix<Real>::Piece pc(n * n);
        for (std::size_t e = 0; e < n * n; ++e) {
            auto q = poly::integral(a.piece(k)[e]);
            q[0] += running[e] - poly::eval(q, breaks[k]);
            running[e] = poly::eval(q, breaks[k + 1]);
            poly::trim(q);
            pc[e] = std::move(q);
        }
        pieces.push_back(std::move(pc));
    }
    return BasicPiecewisePolyMatrix<Real>(a.period(), {breaks.begin(), breaks.end()}, n,
                                          std::move(pieces));
}

template <class Real>
BasicMat<Real> pp_eval(const BasicPiecewisePolyMatrix<Real>& a, Real t) {
    return a.eval(t);
}

/// (1/T) * integral over one period.
template <class Real>
BasicMat<Real> pp_average(const BasicPiecewisePolyMatrix<Real>& a) {
    return pp_antiderivative(a).eval(a.period()) * (Real(1) / a.period());
}

template <class Real>
BasicPiecewisePolyMatrix<Real> pp_scale(const BasicPiecewisePolyMatrix<Real>& a, Real s) {
    return pp_add(BasicPiecewisePolyMatrix<Real>::zero(a.dim(), a.period()), a, s);
}

}  // namespace floquet
