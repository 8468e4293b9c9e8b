#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "floquet_avg/error.hpp"
#include "floquet_avg/ppoly.hpp"
#include "floquet_avg/smallmat.hpp"

namespace floquet {

/// Periodic system with constant Jacobian on consecutive segments.
template <std::floating_point Real = double>
struct BasicPiecewiseConstantSystem {
    Real period;
    std::vector<std::pair<Real, BasicMat<Real>>> segments;  // (duration, Jacobian)

    BasicPiecewiseConstantSystem(Real period_, std::vector<std::pair<Real, BasicMat<Real>>> segs)
        : period(period_), segments(std::move(segs)) {
        if (segments.empty()) throw ValidationError("piecewise-constant system needs segments");
        Real total = 0;
        for (const auto& [d, m] : segments) {
            if (!(d > Real(0))) throw ValidationError("segment durations must be positive");
            if (m.dim() != segments.front().second.dim())
                throw ValidationError("segment dimension mismatch");
            total += d;
        }
        if (std::abs(total - period) > Real(1e-12) * period)
            throw ValidationError("segment durations must sum to the period");
    }

    std::size_t dim() const noexcept { return segments.front().second.dim(); }

    BasicPiecewisePolyMatrix<Real> as_ppoly() const {
        return BasicPiecewisePolyMatrix<Real>::piecewise_constant(segments);
    }
};

using PiecewiseConstantSystem = BasicPiecewiseConstantSystem<double>;

/// exp(M_m d_m) ... exp(M_1 d_1): later segments multiply on the left.
template <class Real>
BasicMat<Real> exact_monodromy_pc(const BasicPiecewiseConstantSystem<Real>& sys) {
    auto f = BasicMat<Real>::identity(sys.dim());
    for (const auto& [duration, jac] : sys.segments) f = matexp(jac, duration) * f;
    return f;
}

/**
 * X(T) for X' = J(t) X, X(0) = I, by classical RK4.
 *
 * Each polynomial piece gets steps_per_piece equal steps, so no step straddles
 * a breakpoint; stage values are taken from the piece's own polynomial even at
 * its right end.
 */
template <class Real>
BasicMat<Real> exact_monodromy_rk(const BasicPiecewisePolyMatrix<Real>& J, int steps_per_piece) {
    if (steps_per_piece < 16) throw ValidationError("exact_monodromy_rk needs >= 16 steps per piece");
    const auto breaks = J.breakpoints();
    auto x = BasicMat<Real>::identity(J.dim());
    for (std::size_t k = 0; k < J.piece_count(); ++k) {
        const Real t0 = breaks[k];
        const Real h = (breaks[k + 1] - t0) / Real(steps_per_piece);
        auto jac = [&](Real t) { return J.eval_piece(k, t); };
        for (int s = 0; s < steps_per_piece; ++s) {
            const Real t = t0 + h * Real(s);
            const auto jm = jac(t + h / 2);
            const auto k1 = jac(t) * x;
            const auto k2 = jm * (x + k1 * (h / 2));
            const auto k3 = jm * (x + k2 * (h / 2));
            const auto k4 = jac(t + h) * (x + k3 * h);
            x += (k1 + Real(2) * k2 + Real(2) * k3 + k4) * (h / 6);
        }
    }
    return x;
}

}  // namespace floquet
