#pragma once

#include <cmath>
#include <complex>
#include <string_view>
#include <vector>

#include "floquet_avg/averaging.hpp"
#include "floquet_avg/error.hpp"
#include "floquet_avg/pendulum.hpp"
#include "floquet_avg/smallmat.hpp"

namespace floquet {

enum class Verdict { AsymptoticallyStable, Marginal, Unstable };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::AsymptoticallyStable: return "stable";
        case Verdict::Marginal: return "marginal";
        case Verdict::Unstable: return "unstable";
    }
    return "unstable";
}

inline constexpr double default_tolerance = 1e-9;

/// 2-DOF stability summary. Both margins are positive inside the
/// asymptotic-stability region and vanish on its boundary.
struct StabilityReport {
    double trace;
    double determinant;
    RootPair<double> multipliers;
    double margin_trace;  // det + 1 - |tr|
    double margin_det;    // 1 - det
    Verdict verdict;
    double tolerance;
};

inline Verdict verdict_from_margins(double margin_trace, double margin_det, double tolerance) {
    if (margin_trace > tolerance && margin_det > tolerance) return Verdict::AsymptoticallyStable;
    if (margin_trace < -tolerance || margin_det < -tolerance) return Verdict::Unstable;
    return Verdict::Marginal;
}

/// Classify from trace and determinant directly (e.g. a determinant taken
/// from a series rather than from F).
inline StabilityReport classify_trace_det(double tr, double d, double tolerance) {
    if (!(tolerance >= 0)) throw ValidationError("tolerance must be >= 0");
    if (!std::isfinite(tr) || !std::isfinite(d)) throw ValidationError("classify: non-finite input");
    const Mat companion{{0, -d}, {1, tr}};
    StabilityReport r{tr, d, char_roots_2x2(companion), d + 1 - std::abs(tr), 1 - d,
                      Verdict::Marginal, tolerance};
    r.verdict = verdict_from_margins(r.margin_trace, r.margin_det, tolerance);
    return r;
}

inline StabilityReport classify(const Mat& f, double tolerance = default_tolerance) {
    if (f.dim() != 2) throw ValidationError("stability classification needs a 2x2 monodromy matrix");
    if (!is_finite(f)) throw ValidationError("classify: non-finite matrix");
    if (!(tolerance >= 0)) throw ValidationError("tolerance must be >= 0");
    const double tr = trace(f);
    const double d = det(f);
    StabilityReport r{tr, d, char_roots_2x2(f), d + 1 - std::abs(tr), 1 - d, Verdict::Marginal,
                      tolerance};
    r.verdict = verdict_from_margins(r.margin_trace, r.margin_det, tolerance);
    return r;
}

/// e^{-2 pi beta omega} + 1 - |tr(exp(pi J-) exp(pi J+))|.
inline double margin_exact(const pendulum::PendulumParams& p) {
    const Mat f = pendulum::exact_monodromy(p);
    return std::exp(-2 * pendulum::pi<> * p.beta * p.omega) + 1 - std::abs(trace(f));
}

/// Liouville-consistent determinant: e^{T tr J0} exp(T sum_j tr A_j).
template <class Real>
Real det_series(const BasicSeriesSystem<Real>& sys, const BasicAveragedExpansion<Real>& avg) {
    Real s = 0;
    for (const auto& a : avg.A) s += trace(a);
    return std::exp(sys.period * trace(sys.J0)) * std::exp(s * sys.period);
}

/// det_series expanded in the order grading and truncated at `order`
/// (e.g. 1 + T tr A_1 + T tr A_2 + (T tr A_1)^2 / 2 at order 2).
template <class Real>
Real det_series_truncated(const BasicSeriesSystem<Real>& sys,
                          const BasicAveragedExpansion<Real>& avg, int order) {
    std::vector<Real> z;
    for (const auto& a : avg.A) z.push_back(trace(a) * sys.period);
    const auto terms = graded_exponential(z, order, Real(1), Real(0));
    Real s = 0;
    for (Real t : terms) s += t;
    return std::exp(sys.period * trace(sys.J0)) * s;
}

/// Stability of the order-K approximation: trace from the order-K partial
/// sum, determinant from the truncated series.
template <class Real>
StabilityReport classify_approximation(const BasicSeriesSystem<Real>& sys,
                                       const BasicAveragingResult<Real>& res, int order,
                                       double tolerance = default_tolerance) {
    const auto& ps = res.monodromy.partial_sums.at(static_cast<std::size_t>(order));
    const double tr = static_cast<double>(trace(ps));
    const double d = static_cast<double>(det_series_truncated(sys, res.expansion, order));
    return classify_trace_det(tr, d, tolerance);
}

}  // namespace floquet
