#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <sstream>

#include "floquet_avg/report.hpp"

using namespace floquet;
using nlohmann::json;

namespace {

json piece(double t0, double t1, json entries) {
    return {{"t_start", t0}, {"t_end", t1}, {"entries", std::move(entries)}};
}

json pendulum_as_custom(double w, double e, double b) {
    const double P = std::numbers::pi;
    json j;
    j["name"] = "custom";
    j["period"] = 2 * P;
    j["J0"] = json::array({json::array({0, 1}), json::array({0, 0})});
    json t1;
    t1["order"] = 1;
    t1["pieces"] = json::array({piece(0, P, json::array({json::array({0, 0}), json::array({e, 0})})),
                                piece(P, 2 * P, json::array({json::array({0, 0}), json::array({-e, 0})}))});
    json t2;
    t2["order"] = 2;
    t2["pieces"] = json::array({piece(0, 2 * P, json::array({json::array({0, 0}), json::array({w * w, -b * w})}))});
    j["terms"] = json::array({t1, t2});
    return j;
}

}  // namespace

TEST_CASE("builtin model parsing") {
    const auto m = parse_model(json::parse(R"({"name": "meissner-damped", "omega": 0.2, "eps": 0.3})"));
    REQUIRE(m.pendulum);
    CHECK(m.pendulum->omega == 0.2);
    CHECK(m.pendulum->beta == 0.0);
    CHECK(m.piecewise_constant());
    CHECK_THROWS_AS(parse_model(json::parse(R"({"name": "meissner-damped", "omega": -1})")), ValidationError);
    CHECK_THROWS_AS(parse_model(json::parse(R"({"name": "meissner-damped", "omega": "x"})")), ValidationError);
    CHECK_THROWS_AS(parse_model(json::parse(R"({"name": "duffing"})")), ValidationError);
    CHECK_THROWS_AS(parse_model(json::parse(R"([1, 2])")), ValidationError);
}

TEST_CASE("custom model reproduces the builtin pendulum") {
    const auto custom = parse_model(pendulum_as_custom(0.3, 0.4, 0.1));
    const auto builtin = builtin_pendulum({0.3, 0.4, 0.1});
    const auto a = report::analyze_document(custom, {});
    const auto b = report::analyze_document(builtin, {});
    for (int k = 0; k <= 4; ++k)
        CHECK(a["trace_by_order"][k].get<double>() ==
              Catch::Approx(b["trace_by_order"][k].get<double>()).margin(1e-12));
    CHECK(a["exact"]["stability"]["verdict"] == "stable");
    CHECK(a["exact"]["exp_product"].is_array());
    CHECK(a["exact"]["stability"]["margin_trace"].get<double>() == Catch::Approx(1.449629390615291).epsilon(1e-12));
    CHECK(b["params"]["omega"] == 0.3);
}

TEST_CASE("custom model validation") {
    auto bad_j0 = pendulum_as_custom(0.3, 0.4, 0.1);
    bad_j0["J0"] = json::array({json::array({1, 0}), json::array({0, 0})});
    CHECK_THROWS_AS(parse_model(bad_j0), ModelError);

    auto gap = pendulum_as_custom(0.3, 0.4, 0.1);
    gap["terms"][0]["pieces"][1]["t_start"] = 3.0;
    CHECK_THROWS_AS(parse_model(gap), ValidationError);

    auto shape = pendulum_as_custom(0.3, 0.4, 0.1);
    shape["terms"][1]["pieces"][0]["entries"] = json::array({json::array({0, 0})});
    CHECK_THROWS_AS(parse_model(shape), ValidationError);

    auto order = pendulum_as_custom(0.3, 0.4, 0.1);
    order["terms"][1]["order"] = 0;
    CHECK_THROWS_AS(parse_model(order), ValidationError);

    auto period = pendulum_as_custom(0.3, 0.4, 0.1);
    period["period"] = -1;
    CHECK_THROWS_AS(parse_model(period), ValidationError);
}

TEST_CASE("three-dimensional custom model has no stability verdict") {
    const auto j = json::parse(R"({"name": "custom", "period": 1.0,
        "J0": [[0, 1, 0], [0, 0, 1], [0, 0, 0]],
        "terms": [{"order": 1, "pieces": [{"t_start": 0, "t_end": 1,
                   "entries": [[[0, 1], 0, 0], [0, 0, 0], [0.5, 0, [0, 0, 1]]]}]}]})");
    const auto doc = report::analyze_document(parse_model(j), {.order = 3});
    CHECK(doc["dimension"] == 3);
    CHECK(doc["approximate"]["stability"].is_null());
    CHECK(doc["exact"]["stability"].is_null());
    CHECK(doc["exact"]["exp_product"].is_null());
    CHECK(doc["exact"]["runge_kutta"].size() == 3);
    CHECK(doc["A"].size() == 3);
}

TEST_CASE("csv formatting") {
    CHECK(report::format_g(0.1) == "0.1");
    CHECK(report::format_g(1.0 / 3) == "0.333333333333");
    CHECK(report::format_opt(std::nullopt).empty());

    scan::ScanSpec spec{{0, 1, 2}, {0, 2, 2}, 0.1, scan::Method::approximate(2), {}};
    std::ostringstream os;
    report::write_scan_csv(os, scan::scan_region(spec));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "omega,eps,beta,method,verdict,margin_trace,margin_det");
    std::getline(is, line);
    CHECK(line.starts_with("0.25,0.5,0.1,order2,"));
    int rows = 1;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 4);

    const auto j = report::scan_json(scan::scan_region(spec));
    CHECK(j["cells"].size() == 4);
    CHECK(j["method"] == "order2");
}
