// floquet-avg: averaging approximations of monodromy matrices, stability
// verdicts and stability-boundary data for linear periodic systems.
//
//   floquet-avg analyze  --model meissner-damped --omega 0.2 --eps 0.3 --order 4
//   floquet-avg scan     --omega 0:0.4:50 --eps 0:1:50 --method exact-pc
//   floquet-avg boundary --omega 0:0.4:41 --branch p --method order4
//   floquet-avg compare  --omega 0.02:0.3:15 --beta 0
//
// Exit codes: 0 ok, 2 invalid input, 3 numeric range error, 4 too many
// boundary samples omitted, 1 anything else.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "floquet_avg/floquet_avg.hpp"

namespace {

using namespace floquet;

constexpr int exit_validation = 2;
constexpr int exit_range = 3;
constexpr int exit_partial = 4;

struct Range {
    double min = 0, max = 0;
    int count = 0;
};

Range parse_range(const std::string& text, const char* what) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3)
        throw ValidationError(std::string(what) + ": expected min:max:count, got '" + text + "'");
    try {
        std::size_t used = 0;
        Range r;
        r.min = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("trailing");
        r.max = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("trailing");
        r.count = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("trailing");
        return r;
    } catch (const std::logic_error&) {
        throw ValidationError(std::string(what) + ": cannot parse range '" + text + "'");
    }
}

unsigned resolve_threads(int flag) {
    if (flag > 0) return static_cast<unsigned>(flag);
    if (const char* env = std::getenv("FLOQUET_AVG_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::logic_error&) {
        }
        std::cerr << "warning: ignoring invalid FLOQUET_AVG_THREADS='" << env << "'\n";
    }
    return scan::default_threads();
}

void emit(const std::string& data, const std::string& output) {
    if (output.empty() || output == "-") {
        std::cout << data << std::flush;
        return;
    }
    std::ofstream f(output, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file '" + output + "'");
    f << data;
}

std::string matrix_text(const Mat& m) {
    std::string s;
    for (std::size_t i = 0; i < m.dim(); ++i) {
        s += "  [";
        for (std::size_t j = 0; j < m.dim(); ++j) s += (j ? ", " : "") + report::format_g(m(i, j));
        s += "]\n";
    }
    return s;
}

std::string analyze_text(const nlohmann::json& doc) {
    auto mat = [](const nlohmann::json& j) {
        Mat m(j.size());
        for (std::size_t i = 0; i < j.size(); ++i)
            for (std::size_t k = 0; k < j.size(); ++k) m(i, k) = j[i][k].get<double>();
        return m;
    };
    std::ostringstream os;
    os << "model " << doc["model"].get<std::string>() << ", order " << doc["order"].get<int>() << "\n";
    for (std::size_t j = 0; j < doc["A"].size(); ++j) os << "A_" << j + 1 << ":\n" << matrix_text(mat(doc["A"][j]));
    os << "trace_by_order:";
    for (const auto& t : doc["trace_by_order"]) os << ' ' << report::format_g(t.get<double>());
    os << "\ndet_series: " << report::format_g(doc["det_series"].get<double>()) << "\n";
    os << "approximate F:\n" << matrix_text(mat(doc["approximate"]["F"]));
    if (!doc["approximate"]["stability"].is_null())
        os << "approximate verdict: " << doc["approximate"]["stability"]["verdict"].get<std::string>() << "\n";
    const auto& ex = doc["exact"];
    os << "exact F:\n" << matrix_text(mat(ex["exp_product"].is_null() ? ex["runge_kutta"] : ex["exp_product"]));
    if (!ex["stability"].is_null()) os << "exact verdict: " << ex["stability"]["verdict"].get<std::string>() << "\n";
    return os.str();
}

struct AnalyzeArgs {
    std::string model = std::string(pendulum::model_name);
    std::string model_file;
    std::optional<double> omega, eps, beta;
    int order = 4;
    std::string format = "json";
    double tolerance = default_tolerance;
    int rk_steps = 512;
    std::string output;
};

int run_analyze(const AnalyzeArgs& a) {
    if (a.order < 1 || a.order > max_order)
        throw ValidationError("--order must be in 1.." + std::to_string(max_order) + " (cap is " +
                              std::to_string(max_order) + "), got " + std::to_string(a.order));
    ModelSpec model;
    if (!a.model_file.empty()) {
        std::ifstream f(a.model_file);
        if (!f) throw ValidationError("cannot read model file '" + a.model_file + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(std::string("model file: ") + e.what());
        }
        model = parse_model(j);
    } else if (a.model == pendulum::model_name) {
        model = builtin_pendulum({});
    } else {
        throw ValidationError("model '" + a.model + "' needs --model-file");
    }
    if (!a.model_file.empty() && a.model != model.name && a.model != std::string(pendulum::model_name))
        throw ValidationError("--model '" + a.model + "' does not match the file's model '" + model.name + "'");
    if (model.pendulum) {
        if (a.omega) model.pendulum->omega = *a.omega;
        if (a.eps) model.pendulum->eps = *a.eps;
        if (a.beta) model.pendulum->beta = *a.beta;
        model.pendulum->validate();
    } else if (a.omega || a.eps || a.beta) {
        std::cerr << "warning: --omega/--eps/--beta ignored for custom models\n";
    }
    const auto doc = report::analyze_document(model, {a.order, a.tolerance, a.rk_steps});
    emit(a.format == "text" ? analyze_text(doc) : report::dump(doc), a.output);
    return 0;
}

struct ScanArgs {
    std::string omega = "0:0.4:50", eps = "0:1:50";
    double beta = 0;
    std::string method = "exact-pc";
    int threads = 0;
    std::string format = "csv";
    double tolerance = default_tolerance;
    int rk_steps = 512;
    std::string output;
};

int run_scan(const ScanArgs& a) {
    const Range w = parse_range(a.omega, "--omega"), e = parse_range(a.eps, "--eps");
    scan::ScanSpec spec{{w.min, w.max, w.count}, {e.min, e.max, e.count}, a.beta,
                        scan::Method::parse(a.method), {a.tolerance, a.rk_steps}};
    const auto grid = scan::scan_region(spec, resolve_threads(a.threads));
    if (a.format == "json") {
        emit(report::dump(report::scan_json(grid)), a.output);
    } else {
        std::ostringstream os;
        report::write_scan_csv(os, grid);
        emit(os.str(), a.output);
    }
    return 0;
}

struct BoundaryArgs {
    std::string omega = "0:0.4:41";
    double beta = 0;
    std::string branch = "both";
    std::string method = "order4";
    std::string domain = "first";
    int threads = 0;
    double tol = 1e-10;
    int rk_steps = 512;
    std::string output;
};

int partial_exit(int ok, int total, const char* what) {
    if (total - ok > 0) std::cerr << what << ": omitted " << total - ok << " of " << total << " samples\n";
    return (total == 0 || ok >= 0.9 * total) ? 0 : exit_partial;
}

int run_boundary(const BoundaryArgs& a) {
    const Range r = parse_range(a.omega, "--omega");
    const auto omegas = scan::linspace(r.min, r.max, r.count);
    const auto method = scan::Method::parse(a.method);
    scan::BoundaryOptions opt;
    if (a.domain == "first") {
        opt.domain = pendulum::Domain::first;
    } else if (a.domain == "second") {
        opt.domain = pendulum::Domain::second;
    } else {
        throw ValidationError("--domain must be first or second");
    }
    opt.tol = a.tol;
    opt.eval.rk_steps = a.rk_steps;
    opt.threads = resolve_threads(a.threads);
    std::vector<pendulum::Branch> branches;
    if (a.branch == "both") {
        branches = {pendulum::Branch::p, pendulum::Branch::n};
    } else {
        branches = {pendulum::parse_branch(a.branch)};
    }
    std::vector<scan::BoundaryCurve> curves;
    int ok = 0, total = 0;
    for (auto b : branches) {
        curves.push_back(scan::trace_boundary(omegas, a.beta, b, method, opt));
        ok += static_cast<int>(curves.back().points.size());
        total += static_cast<int>(omegas.size());
    }
    std::ostringstream os;
    report::write_boundary_csv(os, curves);
    emit(os.str(), a.output);
    return partial_exit(ok, total, "boundary");
}

struct CompareArgs {
    std::string omega = "0.02:0.3:15";
    double beta = 0;
    int threads = 0;
    std::string format = "csv";
    double tol = 1e-10;
    std::string output;
};

int run_compare(const CompareArgs& a) {
    const Range r = parse_range(a.omega, "--omega");
    const auto cmp = scan::compare_boundaries(scan::linspace(r.min, r.max, r.count), a.beta,
                                              resolve_threads(a.threads), a.tol);
    if (a.format == "json") {
        emit(report::dump(report::compare_json(cmp)), a.output);
    } else {
        std::ostringstream os;
        report::write_compare_csv(os, cmp);
        emit(os.str(), a.output);
    }
    int ok = 0;
    for (const auto& row : cmp.rows) ok += row.eps_exact ? 1 : 0;
    for (const auto& s : cmp.summary) {
        std::cerr << "compare: branch " << pendulum::to_string(s.branch)
                  << ": max err2 " << report::format_g(s.max_err2, 6)
                  << ", mean err2 " << report::format_g(s.mean_err2, 6)
                  << ", max err4 " << report::format_g(s.max_err4, 6)
                  << ", mean err4 " << report::format_g(s.mean_err4, 6) << "\n";
    }
    return partial_exit(ok, static_cast<int>(cmp.rows.size()), "compare");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Averaging approximations of Floquet monodromy matrices and stability boundaries"};
    app.require_subcommand(1);

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Averaged and exact monodromy of one model");
    analyze->add_option("--model", an.model, "meissner-damped or custom");
    analyze->add_option("--model-file", an.model_file, "JSON model file");
    analyze->add_option("--omega", an.omega, "relative eigenfrequency");
    analyze->add_option("--eps", an.eps, "relative excitation acceleration");
    analyze->add_option("--beta", an.beta, "damping coefficient");
    analyze->add_option("--order", an.order, "approximation order (1..6)");
    analyze->add_option("--format", an.format, "json or text")->check(CLI::IsMember({"json", "text"}));
    analyze->add_option("--tolerance", an.tolerance, "marginal band half-width");
    analyze->add_option("--rk-steps", an.rk_steps, "RK4 steps per smooth piece");
    analyze->add_option("-o,--output", an.output, "output file (default stdout)");

    ScanArgs sc;
    auto* scan_cmd = app.add_subcommand("scan", "Stability verdicts on an (omega, eps) grid");
    scan_cmd->add_option("--omega", sc.omega, "omega axis min:max:count (cell centers)");
    scan_cmd->add_option("--eps", sc.eps, "eps axis min:max:count (cell centers)");
    scan_cmd->add_option("--beta", sc.beta, "damping coefficient");
    scan_cmd->add_option("--method", sc.method, "exact-pc, exact-rk or order1..order6");
    scan_cmd->add_option("--threads", sc.threads, "worker threads (default: FLOQUET_AVG_THREADS or all cores)");
    scan_cmd->add_option("--format", sc.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    scan_cmd->add_option("--tolerance", sc.tolerance, "marginal band half-width");
    scan_cmd->add_option("--rk-steps", sc.rk_steps, "RK4 steps per smooth piece");
    scan_cmd->add_option("-o,--output", sc.output, "output file (default stdout)");

    BoundaryArgs bd;
    auto* boundary = app.add_subcommand("boundary", "Stability boundary curve eps(omega)");
    boundary->add_option("--omega", bd.omega, "omega samples min:max:count (inclusive)");
    boundary->add_option("--beta", bd.beta, "damping coefficient");
    boundary->add_option("--branch", bd.branch, "p, n or both")->check(CLI::IsMember({"p", "n", "both"}));
    boundary->add_option("--method", bd.method, "order2, order4, exact, exact-rk or orderK");
    boundary->add_option("--domain", bd.domain, "first or second stability domain");
    boundary->add_option("--threads", bd.threads, "worker threads");
    boundary->add_option("--tol", bd.tol, "bisection bracket width");
    boundary->add_option("--rk-steps", bd.rk_steps, "RK4 steps per smooth piece");
    boundary->add_option("-o,--output", bd.output, "output file (default stdout)");

    CompareArgs cp;
    auto* compare = app.add_subcommand("compare", "Exact vs order-2 and order-4 boundaries");
    compare->add_option("--omega", cp.omega, "omega samples min:max:count (inclusive)");
    compare->add_option("--beta", cp.beta, "damping coefficient");
    compare->add_option("--threads", cp.threads, "worker threads");
    compare->add_option("--format", cp.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    compare->add_option("--tol", cp.tol, "bisection bracket width");
    compare->add_option("-o,--output", cp.output, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        return exit_validation;
    }

    try {
        if (*analyze) return run_analyze(an);
        if (*scan_cmd) return run_scan(sc);
        if (*boundary) return run_boundary(bd);
        if (*compare) return run_compare(cp);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const RangeError& e) {
        std::cerr << "numeric range error: " << e.what() << "\n";
        return exit_range;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
