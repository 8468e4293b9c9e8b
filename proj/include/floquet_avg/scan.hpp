#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "floquet_avg/averaging.hpp"
#include "floquet_avg/error.hpp"
#include "floquet_avg/exactmono.hpp"
#include "floquet_avg/pendulum.hpp"
#include "floquet_avg/stability.hpp"

namespace floquet::scan {

using pendulum::Branch;
using pendulum::Domain;
using pendulum::PendulumParams;

/// How the monodromy matrix at a parameter point is obtained.
struct Method {
    enum class Kind { exact_pc, exact_rk, approximate };
    Kind kind = Kind::exact_pc;
    int order = 0;  // approximate only

    static Method exact_pc() { return {Kind::exact_pc, 0}; }
    static Method exact_rk() { return {Kind::exact_rk, 0}; }
    static Method approximate(int k) {
        if (k < 1 || k > max_order)
            throw ValidationError("approximation order must be in 1.." + std::to_string(max_order));
        return {Kind::approximate, k};
    }

    bool is_exact() const noexcept { return kind != Kind::approximate; }

    std::string label() const {
        switch (kind) {
            case Kind::exact_pc: return "exact-pc";
            case Kind::exact_rk: return "exact-rk";
            case Kind::approximate: return "order" + std::to_string(order);
        }
        return {};
    }

    /// Accepts exact-pc, exact (alias), exact-rk, order1..order6.
    static Method parse(std::string_view s) {
        if (s == "exact-pc" || s == "exact") return exact_pc();
        if (s == "exact-rk") return exact_rk();
        if (s.size() == 6 && s.starts_with("order") && s[5] >= '1' && s[5] <= '9')
            return approximate(s[5] - '0');
        throw ValidationError("unknown method '" + std::string(s) +
                              "' (expected exact-pc, exact-rk or order1..order6)");
    }

    friend bool operator==(const Method&, const Method&) = default;
};

struct EvalOptions {
    double tolerance = default_tolerance;
    int rk_steps = 512;
};

inline StabilityReport evaluate(const PendulumParams& p, const Method& m,
                                const EvalOptions& opt = {}) {
    switch (m.kind) {
        case Method::Kind::exact_pc: return classify(pendulum::exact_monodromy(p), opt.tolerance);
        case Method::Kind::exact_rk:
            return classify(exact_monodromy_rk(pendulum::jacobians(p).as_ppoly(), opt.rk_steps),
                            opt.tolerance);
        case Method::Kind::approximate: {
            const auto sys = pendulum::series_split(p);
            return classify_approximation(sys, average_system(sys, m.order), m.order, opt.tolerance);
        }
    }
    throw ValidationError("bad method");
}

/// Scalar whose zero set is the boundary of the trace condition.
inline double margin(const PendulumParams& p, const Method& m, const EvalOptions& opt = {}) {
    if (m.kind == Method::Kind::exact_pc) return margin_exact(p);
    return evaluate(p, m, opt).margin_trace;
}

inline unsigned default_threads() {
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
/// writes only its own output slot, so results do not depend on scheduling.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct Axis {
    double min = 0;
    double max = 1;
    int count = 2;

    void validate(std::string_view name) const {
        if (count < 2) throw ValidationError(std::string(name) + " axis needs count >= 2");
        if (!std::isfinite(min) || !std::isfinite(max) || !(min < max))
            throw ValidationError(std::string(name) + " axis needs finite min < max");
    }
    /// Center of cell i out of `count` equal cells.
    double center(int i) const { return min + (i + 0.5) * (max - min) / count; }
};

struct ScanSpec {
    Axis omega;
    Axis eps;
    double beta = 0;
    Method method;
    EvalOptions options;
};

struct ScanCell {
    double omega;
    double eps;
    StabilityReport report;
};

/// Verdicts at cell centers; cells are eps-major (all omegas of the first eps first).
struct ScanGrid {
    ScanSpec spec;
    std::vector<ScanCell> cells;

    const ScanCell& at(int omega_index, int eps_index) const {
        return cells.at(static_cast<std::size_t>(eps_index * spec.omega.count + omega_index));
    }
};

inline ScanGrid scan_region(const ScanSpec& spec, unsigned threads = 1) {
    spec.omega.validate("omega");
    spec.eps.validate("eps");
    if (spec.omega.min < 0 || spec.eps.min < 0 || !(spec.beta >= 0))
        throw ValidationError("scan parameters must be non-negative");
    const auto nw = static_cast<std::size_t>(spec.omega.count);
    const auto ne = static_cast<std::size_t>(spec.eps.count);
    ScanGrid grid{spec, std::vector<ScanCell>(nw * ne)};
    parallel_for(nw * ne, threads, [&](std::size_t idx) {
        const int iw = static_cast<int>(idx % nw);
        const int ie = static_cast<int>(idx / nw);
        const PendulumParams p{spec.omega.center(iw), spec.eps.center(ie), spec.beta};
        grid.cells[idx] = {p.omega, p.eps, evaluate(p, spec.method, spec.options)};
    });
    return grid;
}

/// Root of margin(eps) on [lo, hi] by bisection until the bracket is below tol.
inline double bisect_boundary(double omega, double beta, double lo, double hi, const Method& m,
                              double tol = 1e-10, const EvalOptions& opt = {}) {
    if (!(lo <= hi)) throw ValidationError("bracket must satisfy lo <= hi");
    if (!(tol > 0)) throw ValidationError("bisection tolerance must be positive");
    auto f = [&](double e) { return margin(PendulumParams{omega, e, beta}, m, opt); };
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) throw BracketError(lo, hi, flo, fhi);
    while (hi - lo > tol) {
        const double mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return lo + (hi - lo) / 2;
}

/**
 * Bracket for a boundary seeded from the fourth-order root r of the same
 * branch and domain: [0.7 r, 1.3 r] is sampled for sign changes of the margin,
 * and the crossing whose trace sign matches the branch (p: tr > 0, n: tr < 0)
 * and lies closest to r is returned.
 */
inline std::optional<std::pair<double, double>> seeded_bracket(double omega, double beta,
                                                               Branch branch, Domain domain,
                                                               const Method& m = Method::exact_pc(),
                                                               const EvalOptions& opt = {},
                                                               int samples = 64) {
    const auto r = pendulum::boundary_order4(omega, beta, branch, domain);
    if (!r || *r <= 0) return std::nullopt;
    const double lo = 0.7 * *r, hi = 1.3 * *r;
    std::vector<double> eps(static_cast<std::size_t>(samples) + 1), mar(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        eps[i] = lo + (hi - lo) * static_cast<double>(i) / samples;
        mar[i] = margin(PendulumParams{omega, eps[i], beta}, m, opt);
    }
    std::optional<std::pair<double, double>> best;
    double best_dist = 0;
    for (std::size_t i = 0; i + 1 < eps.size(); ++i) {
        if (std::signbit(mar[i]) == std::signbit(mar[i + 1]) && mar[i] != 0) continue;
        const double tr = evaluate(PendulumParams{omega, (eps[i] + eps[i + 1]) / 2, beta}, m, opt).trace;
        if ((tr > 0) != (branch == Branch::p)) continue;
        const double dist = std::abs((eps[i] + eps[i + 1]) / 2 - *r);
        if (!best || dist < best_dist) {
            best = std::pair{eps[i], eps[i + 1]};
            best_dist = dist;
        }
    }
    return best;
}

struct BoundaryPoint {
    double omega;
    double eps;
};

struct BoundaryCurve {
    Branch branch;
    Domain domain;
    Method method;
    std::vector<BoundaryPoint> points;  // omega strictly increasing
    int omitted = 0;
};

struct BoundaryOptions {
    Domain domain = Domain::first;
    double tol = 1e-10;
    EvalOptions eval;
    unsigned threads = 1;
};

/// eps on one boundary branch at one omega, or nothing if the branch is absent there.
inline std::optional<double> boundary_point(double omega, double beta, Branch branch,
                                            const Method& m, const BoundaryOptions& opt = {}) {
    if (m.kind == Method::Kind::approximate && m.order == 2) {
        if (opt.domain != Domain::first) return std::nullopt;
        const auto b = pendulum::boundary_order2(omega, beta);
        return branch == Branch::p ? std::optional<double>(b.eps_p) : b.eps_n;
    }
    if (m.kind == Method::Kind::approximate && m.order == 4)
        return pendulum::boundary_order4(omega, beta, branch, opt.domain);
    const auto br = seeded_bracket(omega, beta, branch, opt.domain, m, opt.eval);
    if (!br) return std::nullopt;
    try {
        return bisect_boundary(omega, beta, br->first, br->second, m, opt.tol, opt.eval);
    } catch (const BracketError&) {
        return std::nullopt;
    }
}

/// Boundary branch over omega samples (sorted, distinct). Samples where the
/// branch is absent or its bracket fails are counted in `omitted`.
inline BoundaryCurve trace_boundary(const std::vector<double>& omegas, double beta, Branch branch,
                                    const Method& m, const BoundaryOptions& opt = {}) {
    for (std::size_t i = 1; i < omegas.size(); ++i)
        if (!(omegas[i] > omegas[i - 1])) throw ValidationError("omega samples must increase");
    std::vector<std::optional<double>> eps(omegas.size());
    parallel_for(omegas.size(), opt.threads,
                 [&](std::size_t i) { eps[i] = boundary_point(omegas[i], beta, branch, m, opt); });
    BoundaryCurve c{branch, opt.domain, m, {}, 0};
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (eps[i] && *eps[i] >= 0)
            c.points.push_back({omegas[i], *eps[i]});
        else
            ++c.omitted;
    }
    return c;
}

struct ComparisonRow {
    double omega;
    Branch branch;
    std::optional<double> eps_exact, eps_order2, eps_order4;

    std::optional<double> err2() const {
        if (eps_exact && eps_order2) return std::abs(*eps_order2 - *eps_exact);
        return std::nullopt;
    }
    std::optional<double> err4() const {
        if (eps_exact && eps_order4) return std::abs(*eps_order4 - *eps_exact);
        return std::nullopt;
    }
};

struct ErrorSummary {
    Branch branch;
    double max_err2 = 0, mean_err2 = 0, max_err4 = 0, mean_err4 = 0;
    int count2 = 0, count4 = 0;
};

struct Comparison {
    double beta;
    std::vector<ComparisonRow> rows;  // all p rows, then all n rows
    std::vector<ErrorSummary> summary;
};

/// First-domain boundaries: exact (bisection) against order-2 and order-4 closed forms.
inline Comparison compare_boundaries(const std::vector<double>& omegas, double beta,
                                     unsigned threads = 1, double tol = 1e-10) {
    Comparison out{beta, {}, {}};
    for (Branch br : {Branch::p, Branch::n}) {
        BoundaryOptions opt;
        opt.tol = tol;
        std::vector<ComparisonRow> rows(omegas.size());
        parallel_for(omegas.size(), threads, [&](std::size_t i) {
            const double w = omegas[i];
            rows[i] = {w, br, boundary_point(w, beta, br, Method::exact_pc(), opt),
                       boundary_point(w, beta, br, Method::approximate(2), opt),
                       boundary_point(w, beta, br, Method::approximate(4), opt)};
        });
        ErrorSummary s{br};
        for (const auto& r : rows) {
            if (auto e = r.err2()) {
                s.max_err2 = std::max(s.max_err2, *e);
                s.mean_err2 += *e;
                ++s.count2;
            }
            if (auto e = r.err4()) {
                s.max_err4 = std::max(s.max_err4, *e);
                s.mean_err4 += *e;
                ++s.count4;
            }
        }
        if (s.count2) s.mean_err2 /= s.count2;
        if (s.count4) s.mean_err4 /= s.count4;
        out.summary.push_back(s);
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    }
    return out;
}

/// Inclusive range: count points from min to max (count = 1 gives {min}).
inline std::vector<double> linspace(double min, double max, int count) {
    if (count < 1) throw ValidationError("range count must be >= 1");
    if (!std::isfinite(min) || !std::isfinite(max)) throw ValidationError("range must be finite");
    if (count == 1) return {min};
    if (!(min < max)) throw ValidationError("range needs min < max when count > 1");
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = min + (max - min) * i / (count - 1);
    v.back() = max;
    return v;
}

}  // namespace floquet::scan
