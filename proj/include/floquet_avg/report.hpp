#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floquet_avg/averaging.hpp"
#include "floquet_avg/exactmono.hpp"
#include "floquet_avg/model.hpp"
#include "floquet_avg/scan.hpp"
#include "floquet_avg/stability.hpp"

// Machine-readable output: CSV tables for scans and boundaries, JSON for the
// analysis document. CSV uses ',' and '\n' with 12 significant digits.

namespace floquet::report {

inline std::string format_g(double x, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

inline std::string format_opt(const std::optional<double>& x) { return x ? format_g(*x) : std::string(); }

inline void write_scan_csv(std::ostream& os, const scan::ScanGrid& g) {
    os << "omega,eps,beta,method,verdict,margin_trace,margin_det\n";
    const std::string method = g.spec.method.label();
    const std::string beta = format_g(g.spec.beta);
    for (const auto& c : g.cells) {
        os << format_g(c.omega) << ',' << format_g(c.eps) << ',' << beta << ',' << method << ','
           << to_string(c.report.verdict) << ',' << format_g(c.report.margin_trace) << ','
           << format_g(c.report.margin_det) << '\n';
    }
}

inline nlohmann::json scan_json(const scan::ScanGrid& g) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : g.cells) {
        cells.push_back({{"omega", c.omega},
                         {"eps", c.eps},
                         {"verdict", to_string(c.report.verdict)},
                         {"margin_trace", c.report.margin_trace},
                         {"margin_det", c.report.margin_det}});
    }
    const auto axis = [](const scan::Axis& a) {
        return nlohmann::json{{"min", a.min}, {"max", a.max}, {"count", a.count}};
    };
    return {{"omega_axis", axis(g.spec.omega)},
            {"eps_axis", axis(g.spec.eps)},
            {"beta", g.spec.beta},
            {"method", g.spec.method.label()},
            {"tolerance", g.spec.options.tolerance},
            {"cells", std::move(cells)}};
}

inline void write_boundary_csv(std::ostream& os, const std::vector<scan::BoundaryCurve>& curves) {
    os << "omega,eps,branch,method\n";
    for (const auto& c : curves) {
        const std::string branch(pendulum::to_string(c.branch));
        const std::string method = c.method.label();
        for (const auto& p : c.points)
            os << format_g(p.omega) << ',' << format_g(p.eps) << ',' << branch << ',' << method << '\n';
    }
}

inline void write_compare_csv(std::ostream& os, const scan::Comparison& cmp) {
    os << "omega,branch,eps_exact,eps_order2,eps_order4,err2,err4\n";
    for (const auto& r : cmp.rows) {
        os << format_g(r.omega) << ',' << pendulum::to_string(r.branch) << ',' << format_opt(r.eps_exact)
           << ',' << format_opt(r.eps_order2) << ',' << format_opt(r.eps_order4) << ','
           << format_opt(r.err2()) << ',' << format_opt(r.err4()) << '\n';
    }
}

inline nlohmann::json optional_json(const std::optional<double>& x) {
    return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

inline nlohmann::json compare_json(const scan::Comparison& cmp) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : cmp.rows) {
        rows.push_back({{"omega", r.omega},
                        {"branch", pendulum::to_string(r.branch)},
                        {"eps_exact", optional_json(r.eps_exact)},
                        {"eps_order2", optional_json(r.eps_order2)},
                        {"eps_order4", optional_json(r.eps_order4)},
                        {"err2", optional_json(r.err2())},
                        {"err4", optional_json(r.err4())}});
    }
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& s : cmp.summary) {
        summary.push_back({{"branch", pendulum::to_string(s.branch)},
                           {"max_err2", s.max_err2},
                           {"mean_err2", s.mean_err2},
                           {"max_err4", s.max_err4},
                           {"mean_err4", s.mean_err4},
                           {"count2", s.count2},
                           {"count4", s.count4}});
    }
    return {{"beta", cmp.beta}, {"rows", std::move(rows)}, {"summary", std::move(summary)}};
}

inline nlohmann::json matrix_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json stability_json(const StabilityReport& r) {
    const auto z = [](std::complex<double> c) { return nlohmann::json::array({c.real(), c.imag()}); };
    return {{"trace", r.trace},
            {"determinant", r.determinant},
            {"multipliers", nlohmann::json::array({z(r.multipliers.first), z(r.multipliers.second)})},
            {"margin_trace", r.margin_trace},
            {"margin_det", r.margin_det},
            {"verdict", to_string(r.verdict)},
            {"tolerance", r.tolerance}};
}

struct AnalyzeOptions {
    int order = 4;
    double tolerance = default_tolerance;
    int rk_steps = 512;
};

/**
 * Full analysis document for one model:
 *
 *   model, dimension, period, order, A[], closure_residuals[], trace_by_order[],
 *   det_series, det_series_truncated,
 *   approximate {F, F_direct, stability | null},
 *   exact {exp_product | null, runge_kutta, stability | null}
 *
 * Stability entries are null for dimensions other than 2.
 */
inline nlohmann::json analyze_document(const ModelSpec& model, const AnalyzeOptions& opt) {
    const auto sys = model.series();
    const auto res = average_system(sys, opt.order);
    const auto& ex = res.expansion;
    const bool two_dof = sys.dim() == 2;

    nlohmann::json doc;
    doc["model"] = model.name;
    if (model.pendulum) {
        doc["params"] = {{"omega", model.pendulum->omega},
                         {"eps", model.pendulum->eps},
                         {"beta", model.pendulum->beta}};
    }
    doc["dimension"] = sys.dim();
    doc["period"] = sys.period;
    doc["order"] = opt.order;

    nlohmann::json A = nlohmann::json::array();
    for (const auto& a : ex.A) A.push_back(matrix_json(a));
    doc["A"] = std::move(A);
    nlohmann::json traceA = nlohmann::json::array();
    for (const auto& a : ex.A) traceA.push_back(trace(a));
    doc["trace_A"] = std::move(traceA);
    doc["closure_residuals"] = ex.closure_residuals;
    doc["trace_by_order"] = res.monodromy.trace_by_order;
    doc["det_series"] = det_series(sys, ex);
    doc["det_series_truncated"] = det_series_truncated(sys, ex, opt.order);

    const Mat& approx = res.monodromy.partial_sums.back();
    nlohmann::json ap{{"F", matrix_json(approx)},
                      {"F_direct", matrix_json(monodromy_direct(res.standard.X0, ex, sys.period))},
                      {"stability", nullptr}};
    if (two_dof) ap["stability"] = stability_json(classify_approximation(sys, res, opt.order, opt.tolerance));
    doc["approximate"] = std::move(ap);

    nlohmann::json exact{{"exp_product", nullptr}, {"runge_kutta", nullptr}, {"stability", nullptr}};
    const Mat rk = exact_monodromy_rk(model.jacobian(), opt.rk_steps);
    exact["runge_kutta"] = matrix_json(rk);
    Mat best = rk;
    if (const auto pc = model.piecewise_constant()) {
        best = exact_monodromy_pc(*pc);
        exact["exp_product"] = matrix_json(best);
    }
    if (two_dof) exact["stability"] = stability_json(classify(best, opt.tolerance));
    doc["exact"] = std::move(exact);
    return doc;
}

/// Number formatting for JSON output: shortest round-trip representation.
inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace floquet::report
