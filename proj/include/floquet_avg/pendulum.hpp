#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "floquet_avg/averaging.hpp"
#include "floquet_avg/error.hpp"
#include "floquet_avg/exactmono.hpp"

// Inverted pendulum with a vertically vibrating pivot and viscous damping,
// linearized about the upper equilibrium. The pivot acceleration is +c on
// [0, pi) and -c on [pi, 2 pi):
//
//   phi' = s,   s' = -beta omega s + (omega^2 +/- eps) phi.

namespace floquet::pendulum {

inline constexpr std::string_view model_name = "meissner-damped";

struct PendulumParams {
    double omega = 0;  // relative eigenfrequency sqrt(g/l)
    double eps = 0;    // relative excitation acceleration c/l
    double beta = 0;   // damping b/g

    void validate() const {
        if (!std::isfinite(omega) || !std::isfinite(eps) || !std::isfinite(beta))
            throw ValidationError("pendulum parameters must be finite");
        if (omega < 0 || eps < 0 || beta < 0)
            throw ValidationError("pendulum parameters must be non-negative");
    }
};

template <class Real = double>
inline constexpr Real pi = std::numbers::pi_v<Real>;

template <class Real = double>
BasicPiecewiseConstantSystem<Real> jacobians(const PendulumParams& p) {
    p.validate();
    const Real w = p.omega, e = p.eps, b = p.beta;
    BasicMat<Real> plus{{0, 1}, {w * w + e, -b * w}};
    BasicMat<Real> minus{{0, 1}, {w * w - e, -b * w}};
    return BasicPiecewiseConstantSystem<Real>(2 * pi<Real>, {{pi<Real>, plus}, {pi<Real>, minus}});
}

/**
 * J = J0 + J1(t) + J2 with J0 = [[0,1],[0,0]], J1 = +/-eps at (2,1) and
 * J2 = [[0,0],[omega^2, -beta omega]].
 *
 * eps counts as first order; omega^2 and beta*omega as second order.
 */
template <class Real = double>
BasicSeriesSystem<Real> series_split(const PendulumParams& p) {
    p.validate();
    using PPM = BasicPiecewisePolyMatrix<Real>;
    const Real w = p.omega, e = p.eps, b = p.beta;
    const BasicMat<Real> j1p{{0, 0}, {e, 0}};
    const std::vector<std::pair<Real, BasicMat<Real>>> j1{{pi<Real>, j1p}, {pi<Real>, -j1p}};
    return BasicSeriesSystem<Real>(2 * pi<Real>, BasicMat<Real>{{0, 1}, {0, 0}},
                                   {PPM::piecewise_constant(j1),
                                    PPM::constant(BasicMat<Real>{{0, 0}, {w * w, -b * w}},
                                                  2 * pi<Real>)});
}

/// Exact monodromy exp(pi J-) exp(pi J+).
template <class Real = double>
BasicMat<Real> exact_monodromy(const PendulumParams& p) {
    return exact_monodromy_pc(jacobians<Real>(p));
}

// Closed-form reference values from the symbolic averaging of this model.
namespace closed_form {

template <class Real = double>
BasicMat<Real> F0() {
    return {{1, 2 * pi<Real>}, {0, 1}};
}

template <class Real = double>
BasicMat<Real> A1(const PendulumParams& p) {
    const Real P = pi<Real>, e = p.eps;
    return BasicMat<Real>{{P * P, 2 * P * P * P}, {0, -P * P}} * (e / (2 * P));
}

template <class Real = double>
BasicMat<Real> F1(const PendulumParams& p) {
    const Real P = pi<Real>, e = p.eps;
    return BasicMat<Real>{{1, 0}, {0, -1}} * (P * P * e);
}

template <class Real = double>
BasicMat<Real> A2(const PendulumParams& p) {
    const Real P = pi<Real>, e = p.eps, w = p.omega, b = p.beta;
    const Real e2 = e * e, w2 = w * w, P2 = P * P, P3 = P2 * P, P4 = P2 * P2, P5 = P4 * P;
    BasicMat<Real> m{{Real(2) / 3 * e2 * P4 - 2 * P2 * w2,
                      4 * e2 * P5 / 15 - Real(8) / 3 * P3 * w2 + 2 * P2 * b * w},
                     {-Real(2) / 3 * e2 * P3 + 2 * P * w2,
                      -Real(2) / 3 * e2 * P4 + 2 * P2 * w2 - 2 * P * b * w}};
    return m * (1 / (2 * P));
}

template <class Real = double>
BasicMat<Real> F2(const PendulumParams& p) {
    const Real P = pi<Real>, e = p.eps, w = p.omega, b = p.beta;
    const Real e2 = e * e, w2 = w * w, P2 = P * P, P3 = P2 * P, P4 = P2 * P2, P5 = P4 * P;
    return {{-P4 * e2 / 6 + 2 * P2 * w2, -P5 * e2 / 15 + Real(4) / 3 * P3 * w2 - 2 * P2 * b * w},
            {-Real(2) / 3 * P3 * e2 + 2 * P * w2, -P4 * e2 / 6 + 2 * P2 * w2 - 2 * P * b * w}};
}

/// tr(F_2) = -pi^4 eps^2 / 3 + 4 pi^2 omega^2 - 2 pi beta omega.
template <class Real = double>
Real trace_F2(const PendulumParams& p) {
    const Real P = pi<Real>, e = p.eps, w = p.omega, b = p.beta;
    return -P * P * P * P * e * e / 3 + 4 * P * P * w * w - 2 * P * b * w;
}

/// T tr(A_2) = -2 pi beta omega.
template <class Real = double>
Real period_times_trace_A2(const PendulumParams& p) {
    return -2 * pi<Real> * Real(p.beta) * Real(p.omega);
}

}  // namespace closed_form

enum class Branch { p, n };
enum class Domain { first, second };

inline std::string_view to_string(Branch b) { return b == Branch::p ? "p" : "n"; }
inline std::string_view to_string(Domain d) { return d == Domain::first ? "first" : "second"; }

inline Branch parse_branch(std::string_view s) {
    if (s == "p") return Branch::p;
    if (s == "n") return Branch::n;
    throw ValidationError("branch must be 'p' or 'n', got '" + std::string(s) + "'");
}

struct Order2Boundary {
    double eps_p;
    std::optional<double> eps_n;  // empty when the radicand is negative
};

/// Second-order borders: eps_p = (2 sqrt3 / pi) omega,
/// eps_n = (2 sqrt3 / pi) sqrt(omega^2 - beta omega / pi + 1 / pi^2).
inline Order2Boundary boundary_order2(double omega, double beta) {
    if (!(omega >= 0) || !(beta >= 0)) throw ValidationError("omega and beta must be >= 0");
    const double P = pi<>;
    const double k = 2 * std::sqrt(3.0) / P;
    const double rad = omega * omega - beta * omega / P + 1 / (P * P);
    Order2Boundary out{k * omega, std::nullopt};
    if (rad >= 0) out.eps_n = k * std::sqrt(rad);
    return out;
}

/// a x^2 + b x + c = 0 in x = eps^2.
struct Quartic {
    double a, b, c;

    double residual(double eps) const {
        const double x = eps * eps;
        return (a * x + b) * x + c;
    }
    /// Largest term magnitude at eps, for relative residuals.
    double scale(double eps) const {
        const double x = eps * eps;
        return std::max({std::abs(a * x * x), std::abs(b * x), std::abs(c)});
    }
};

/// Fourth-order boundary quartic for one branch.
inline Quartic quartic_order4(double omega, double beta, Branch branch) {
    const double P = pi<>, w = omega, b = beta;
    const double P2 = P * P, P4 = P2 * P2, P8 = P4 * P4;
    const double lead = P8 / 1260;
    const double mid = -(P4 / 3) * (1 + 4 * P2 * w * w / 15 - P * b * w);
    const double inner = 1 + P2 * w * w / 3 - b * w * P;
    const double c = branch == Branch::p ? 4 * P2 * w * w * inner
                                         : 4 * (1 - b * P * w + P2 * w * w * (inner + b * b));
    return {lead, mid, c};
}

struct BoundaryRoot {
    Branch branch;
    Domain domain;
    double eps;
};

/**
 * Non-negative eps roots of both fourth-order quartics. The smaller eps^2
 * root of a branch bounds the first stability domain, the larger the second.
 * A branch with complex eps^2 roots contributes nothing.
 */
inline std::vector<BoundaryRoot> boundary_order4(double omega, double beta) {
    if (!(omega >= 0) || !(beta >= 0)) throw ValidationError("omega and beta must be >= 0");
    std::vector<BoundaryRoot> out;
    for (Branch br : {Branch::p, Branch::n}) {
        const auto q = quartic_order4(omega, beta, br);
        const double disc = q.b * q.b - 4 * q.a * q.c;
        if (disc < 0) continue;
        const double s = -(q.b + std::copysign(std::sqrt(disc), q.b)) / 2;
        double x1 = s / q.a;
        double x2 = s != 0 ? q.c / s : 0.0;
        if (x1 > x2) std::swap(x1, x2);
        if (x1 >= 0) out.push_back({br, Domain::first, std::sqrt(x1)});
        if (x2 >= 0) out.push_back({br, Domain::second, std::sqrt(x2)});
    }
    return out;
}

inline std::optional<double> boundary_order4(double omega, double beta, Branch branch,
                                             Domain domain) {
    for (const auto& r : boundary_order4(omega, beta))
        if (r.branch == branch && r.domain == domain) return r.eps;
    return std::nullopt;
}

}  // namespace floquet::pendulum
