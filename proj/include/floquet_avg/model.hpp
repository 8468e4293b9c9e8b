#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "floquet_avg/averaging.hpp"
#include "floquet_avg/error.hpp"
#include "floquet_avg/exactmono.hpp"
#include "floquet_avg/pendulum.hpp"

// Model files (JSON):
//
//   {"name": "meissner-damped", "omega": 0.2, "eps": 0.3, "beta": 0.0}
//
//   {"name": "custom", "period": 6.283185307179586, "J0": [[0, 1], [0, 0]],
//    "terms": [{"order": 1,
//               "pieces": [{"t_start": 0, "t_end": 3.14159, "entries": [[[0], [0]], [[0.3], [0]]]},
//                          ...]}]}
//
// entries[i][j] is the ascending coefficient list of a polynomial in the
// global time t. Pieces of a term must tile [0, period]; several terms with
// the same order are added.

namespace floquet {

struct ModelSpec {
    std::string name;
    std::optional<pendulum::PendulumParams> pendulum;  // builtin model
    std::optional<SeriesSystem> custom;

    SeriesSystem series() const {
        if (pendulum) return pendulum::series_split(*pendulum);
        return *custom;
    }

    /// Full Jacobian J(t) as a piecewise polynomial.
    PiecewisePolyMatrix jacobian() const {
        if (pendulum) return pendulum::jacobians(*pendulum).as_ppoly();
        return custom->total();
    }

    /// Segment form when every piece of J(t) is constant.
    std::optional<PiecewiseConstantSystem> piecewise_constant() const {
        if (pendulum) return pendulum::jacobians(*pendulum);
        const auto j = jacobian();
        if (!j.is_piecewise_constant()) return std::nullopt;
        std::vector<std::pair<double, Mat>> segs;
        const auto br = j.breakpoints();
        for (std::size_t k = 0; k < j.piece_count(); ++k)
            segs.emplace_back(br[k + 1] - br[k], j.eval_piece(k, br[k]));
        return PiecewiseConstantSystem(j.period(), std::move(segs));
    }
};

namespace detail {

inline double get_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ValidationError(std::string("model: missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

inline Mat parse_matrix(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ValidationError(std::string("model: ") + what + " must be a square array");
    Mat m(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != j.size())
            throw ValidationError(std::string("model: ") + what + " must be square");
        for (std::size_t k = 0; k < j.size(); ++k) {
            if (!j[i][k].is_number()) throw ValidationError(std::string("model: ") + what + " entries must be numbers");
            m(i, k) = j[i][k].get<double>();
        }
    }
    return m;
}

inline PiecewisePolyMatrix parse_term(const nlohmann::json& term, std::size_t n, double period) {
    if (!term.contains("pieces") || !term["pieces"].is_array() || term["pieces"].empty())
        throw ValidationError("model: every term needs a non-empty 'pieces' array");
    std::vector<double> breaks{0.0};
    std::vector<PiecewisePolyMatrix::Piece> pieces;
    for (const auto& pc : term["pieces"]) {
        const double t0 = get_number(pc, "t_start");
        const double t1 = get_number(pc, "t_end");
        if (std::abs(t0 - breaks.back()) > 1e-12 * period)
            throw ValidationError("model: pieces must be contiguous and start at 0");
        breaks.push_back(t1);
        const auto& e = pc.at("entries");
        if (!e.is_array() || e.size() != n) throw ValidationError("model: piece entries must be n x n");
        PiecewisePolyMatrix::Piece piece(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!e[i].is_array() || e[i].size() != n) throw ValidationError("model: piece entries must be n x n");
            for (std::size_t k = 0; k < n; ++k) {
                const auto& coeffs = e[i][k];
                if (coeffs.is_number()) {
                    piece[i * n + k] = {coeffs.get<double>()};
                } else if (coeffs.is_array()) {
                    for (const auto& c : coeffs) {
                        if (!c.is_number()) throw ValidationError("model: coefficients must be numbers");
                        piece[i * n + k].push_back(c.get<double>());
                    }
                } else {
                    throw ValidationError("model: entry must be a coefficient list");
                }
            }
        }
        pieces.push_back(std::move(piece));
    }
    breaks.front() = 0.0;
    return PiecewisePolyMatrix(period, std::move(breaks), n, std::move(pieces));
}

}  // namespace detail

inline ModelSpec parse_model(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
        throw ValidationError("model: expected an object with a 'name'");
    ModelSpec spec;
    spec.name = j["name"].get<std::string>();
    if (spec.name == pendulum::model_name) {
        pendulum::PendulumParams p;
        if (j.contains("omega")) p.omega = detail::get_number(j, "omega");
        if (j.contains("eps")) p.eps = detail::get_number(j, "eps");
        if (j.contains("beta")) p.beta = detail::get_number(j, "beta");
        p.validate();
        spec.pendulum = p;
        return spec;
    }
    if (spec.name != "custom")
        throw ValidationError("model: unknown model '" + spec.name + "' (expected " +
                              std::string(pendulum::model_name) + " or custom)");
    const double period = detail::get_number(j, "period");
    if (!(period > 0) || !std::isfinite(period)) throw ValidationError("model: period must be positive");
    if (!j.contains("J0")) throw ValidationError("model: missing 'J0'");
    Mat j0 = detail::parse_matrix(j["J0"], "J0");
    std::vector<PiecewisePolyMatrix> terms;
    if (j.contains("terms")) {
        if (!j["terms"].is_array()) throw ValidationError("model: 'terms' must be an array");
        for (const auto& t : j["terms"]) {
            if (!t.contains("order") || !t["order"].is_number_integer() || t["order"].get<int>() < 1)
                throw ValidationError("model: term order must be an integer >= 1");
            const auto order = static_cast<std::size_t>(t["order"].get<int>());
            auto term = detail::parse_term(t, j0.dim(), period);
            while (terms.size() < order) terms.push_back(PiecewisePolyMatrix::zero(j0.dim(), period));
            terms[order - 1] = pp_add(terms[order - 1], term);
        }
    }
    spec.custom = SeriesSystem(period, std::move(j0), std::move(terms));
    return spec;
}

inline ModelSpec builtin_pendulum(const pendulum::PendulumParams& p) {
    p.validate();
    return {std::string(pendulum::model_name), p, std::nullopt};
}

}  // namespace floquet
