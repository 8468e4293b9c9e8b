#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "floquet_avg/error.hpp"
#include "floquet_avg/ppoly.hpp"
#include "floquet_avg/smallmat.hpp"

namespace floquet {

inline constexpr int max_order = 6;

/**
 * Jacobian split by order of smallness: J(t) = J0 + J_1(t) + J_2(t) + ...
 *
 * J0 is constant and nilpotent, so the zeroth-order fundamental matrix
 * exp(J0 t) is a finite matrix polynomial. terms[j-1] holds J_j.
 */
template <std::floating_point Real = double>
struct BasicSeriesSystem {
    Real period;
    BasicMat<Real> J0;
    std::vector<BasicPiecewisePolyMatrix<Real>> terms;

    BasicSeriesSystem(Real period_, BasicMat<Real> j0,
                      std::vector<BasicPiecewisePolyMatrix<Real>> terms_)
        : period(period_), J0(std::move(j0)), terms(std::move(terms_)) {
        if (!(period > Real(0)) || !std::isfinite(period))
            throw ValidationError("period must be positive and finite");
        if (norm1(power(J0, static_cast<unsigned>(J0.dim()))) >= Real(1e-12))
            throw ModelError("J0 must be nilpotent (J0^n = 0)");
        for (const auto& t : terms) {
            if (t.dim() != J0.dim()) throw ValidationError("series term dimension mismatch");
            if (std::abs(t.period() - period) > Real(1e-12) * period)
                throw ValidationError("series term period mismatch");
        }
    }

    std::size_t dim() const noexcept { return J0.dim(); }

    /// J_j for j >= 1, zero beyond the stored terms.
    BasicPiecewisePolyMatrix<Real> term(std::size_t j) const {
        if (j >= 1 && j <= terms.size()) return terms[j - 1];
        return BasicPiecewisePolyMatrix<Real>::zero(dim(), period);
    }

    /// J0 + sum of all terms.
    BasicPiecewisePolyMatrix<Real> total() const {
        auto sum = BasicPiecewisePolyMatrix<Real>::constant(J0, period);
        for (const auto& t : terms) sum = pp_add(sum, t);
        return sum;
    }
};

using SeriesSystem = BasicSeriesSystem<double>;

template <std::floating_point Real = double>
struct BasicStandardForm {
    BasicPiecewisePolyMatrix<Real> X0;
    BasicPiecewisePolyMatrix<Real> X0_inverse;
    std::vector<BasicPiecewisePolyMatrix<Real>> H;  // H[j-1] = X0^-1 J_j X0
};

template <std::floating_point Real = double>
struct BasicAveragedExpansion {
    std::vector<BasicMat<Real>> A;                  // A_1..A_N
    std::vector<BasicPiecewisePolyMatrix<Real>> U;  // U_1..U_{N-1}
    std::vector<Real> closure_residuals;            // ||U_j(T)||_1

    int order() const noexcept { return static_cast<int>(A.size()); }

    BasicMat<Real> sum_A() const {
        BasicMat<Real> s(A.front().dim());
        for (const auto& a : A) s += a;
        return s;
    }

    /// Every ||U_j(T)||_1 below 1e-9 (1 + largest coefficient of U_j).
    bool closure_ok() const {
        for (std::size_t j = 0; j < U.size(); ++j)
            if (!(closure_residuals[j] < Real(1e-9) * (Real(1) + U[j].max_abs_coefficient())))
                return false;
        return true;
    }
};

template <std::floating_point Real = double>
struct BasicMonodromyExpansion {
    BasicMat<Real> F0;
    std::vector<BasicMat<Real>> F_terms;       // F_terms[j] = F_j, F_terms[0] = F0
    std::vector<BasicMat<Real>> partial_sums;  // partial_sums[k] = F_0 + ... + F_k
    std::vector<Real> trace_by_order;          // tr(F_j)

    int order() const noexcept { return static_cast<int>(F_terms.size()) - 1; }
};

using StandardForm = BasicStandardForm<double>;
using AveragedExpansion = BasicAveragedExpansion<double>;
using MonodromyExpansion = BasicMonodromyExpansion<double>;

/// exp(J0 t) as a matrix polynomial, valid for nilpotent J0.
template <class Real>
BasicPiecewisePolyMatrix<Real> nilpotent_exponential(const BasicMat<Real>& j0, Real period) {
    const std::size_t n = j0.dim();
    typename BasicPiecewisePolyMatrix<Real>::Piece pc(n * n, Poly<Real>(n, Real(0)));
    auto pw = BasicMat<Real>::identity(n);
    Real factorial = 1;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            pw = pw * j0;
            factorial *= Real(k);
        }
        for (std::size_t e = 0; e < n * n; ++e) pc[e][k] = pw.data()[e] / factorial;
    }
    for (auto& p : pc) poly::trim(p);
    return BasicPiecewisePolyMatrix<Real>(period, {Real(0), period}, n, {std::move(pc)});
}

template <class Real>
BasicStandardForm<Real> standard_form(const BasicSeriesSystem<Real>& sys) {
    BasicStandardForm<Real> sf{nilpotent_exponential(sys.J0, sys.period),
                               nilpotent_exponential(BasicMat<Real>(-sys.J0), sys.period),
                               {}};
    sf.H.reserve(sys.terms.size());
    for (const auto& j : sys.terms) sf.H.push_back(pp_mul(pp_mul(sf.X0_inverse, j), sf.X0));
    return sf;
}

/**
 * Averaging recursion to order N.
 *
 * With G_n = H_n + sum_{i<n} (H_{n-i} U_i - U_i A_{n-i}):
 *   A_n = average of G_n,   U_n = integral_0^t (G_n - A_n).
 * Missing H orders are zero.
 */
template <class Real>
BasicAveragedExpansion<Real> run_recursion(const std::vector<BasicPiecewisePolyMatrix<Real>>& H,
                                           Real period, int order) {
    if (order < 1 || order > max_order) {
        throw OrderTooHighError("order must be in 1.." + std::to_string(max_order) + ", got " +
                                std::to_string(order));
    }
    if (H.empty()) throw ValidationError("run_recursion: no H terms (dimension unknown)");
    using PPM = BasicPiecewisePolyMatrix<Real>;
    const std::size_t n = H.front().dim();
    auto h = [&](int j) -> PPM {
        if (j >= 1 && static_cast<std::size_t>(j) <= H.size()) return H[static_cast<std::size_t>(j - 1)];
        return PPM::zero(n, period);
    };

    BasicAveragedExpansion<Real> out;
    for (int m = 1; m <= order; ++m) {
        PPM g = h(m);
        for (int i = 1; i < m; ++i) {
            const auto& ui = out.U[static_cast<std::size_t>(i - 1)];
            g = pp_add(g, pp_mul(h(m - i), ui));
            g = pp_sub(g, pp_mul(ui, PPM::constant(out.A[static_cast<std::size_t>(m - i - 1)], period)));
        }
        out.A.push_back(pp_average(g));
        if (m < order) {
            auto u = pp_antiderivative(pp_sub(g, PPM::constant(out.A.back(), period)));
            out.closure_residuals.push_back(norm1(u.eval(period)));
            out.U.push_back(std::move(u));
        }
    }
    return out;
}

namespace detail {
template <class T>
struct scalar_of {
    using type = T;
};
template <class Real>
struct scalar_of<BasicMat<Real>> {
    using type = Real;
};
}  // namespace detail

/**
 * Graded exponential: coefficient of s^j in exp(sum_k s^k X_k), j = 0..N.
 *
 * Z_j = sum_m (1/m!) sum over ordered compositions k_1+...+k_m = j of
 * X_{k_1} ... X_{k_m}. X[k-1] holds X_k. Works for matrices and scalars.
 */
template <class T>
std::vector<T> graded_exponential(const std::vector<T>& X, int order, const T& one, const T& zero) {
    using Scalar = typename detail::scalar_of<T>::type;
    const auto N = static_cast<std::size_t>(order);
    auto x = [&](std::size_t k) -> T { return k <= X.size() ? X[k - 1] : zero; };
    // P[m][j]: sum over compositions of j into m parts.
    std::vector<std::vector<T>> P(N + 1, std::vector<T>(N + 1, zero));
    for (std::size_t j = 1; j <= N; ++j) P[1][j] = x(j);
    for (std::size_t m = 2; m <= N; ++m)
        for (std::size_t j = m; j <= N; ++j)
            for (std::size_t k = 1; k + m - 1 <= j; ++k) P[m][j] = P[m][j] + P[m - 1][j - k] * x(k);

    std::vector<T> Z(N + 1, zero);
    Z[0] = one;
    for (std::size_t j = 1; j <= N; ++j) {
        Scalar factorial = 1;
        for (std::size_t m = 1; m <= j; ++m) {
            factorial *= static_cast<Scalar>(m);
            Z[j] = Z[j] + P[m][j] * (Scalar(1) / factorial);
        }
    }
    return Z;
}

template <class Real>
BasicMonodromyExpansion<Real> assemble_monodromy(const BasicPiecewisePolyMatrix<Real>& X0,
                                                 const BasicAveragedExpansion<Real>& avg,
                                                 Real period, int order) {
    if (order < 0 || order > avg.order())
        throw ValidationError("assemble_monodromy: order exceeds the averaged expansion");
    const std::size_t n = X0.dim();
    std::vector<BasicMat<Real>> scaled;
    for (const auto& a : avg.A) scaled.push_back(a * period);
    const auto Z = graded_exponential(scaled, order, BasicMat<Real>::identity(n), BasicMat<Real>(n));

    BasicMonodromyExpansion<Real> out;
    out.F0 = X0.eval(period);
    for (int j = 0; j <= order; ++j) {
        const auto& zj = Z[static_cast<std::size_t>(j)];
        auto fj = j == 0 ? out.F0 : out.F0 * zj;
        out.trace_by_order.push_back(trace(fj));
        out.partial_sums.push_back(j == 0 ? fj : out.partial_sums.back() + fj);
        out.F_terms.push_back(std::move(fj));
    }
    return out;
}

/// F0 exp((A_1 + ... + A_N) T).
template <class Real>
BasicMat<Real> monodromy_direct(const BasicPiecewisePolyMatrix<Real>& X0,
                                const BasicAveragedExpansion<Real>& avg, Real period) {
    return X0.eval(period) * matexp(avg.sum_A(), period);
}

/// Standard form, recursion and monodromy expansion in one pass.
template <std::floating_point Real = double>
struct BasicAveragingResult {
    BasicStandardForm<Real> standard;
    BasicAveragedExpansion<Real> expansion;
    BasicMonodromyExpansion<Real> monodromy;
};

using AveragingResult = BasicAveragingResult<double>;

template <class Real>
BasicAveragingResult<Real> average_system(const BasicSeriesSystem<Real>& sys, int order) {
    auto sf = standard_form(sys);
    if (sf.H.empty()) sf.H.push_back(BasicPiecewisePolyMatrix<Real>::zero(sys.dim(), sys.period));
    auto ex = run_recursion(sf.H, sys.period, order);
    auto mono = assemble_monodromy(sf.X0, ex, sys.period, order);
    return {std::move(sf), std::move(ex), std::move(mono)};
}

}  // namespace floquet
