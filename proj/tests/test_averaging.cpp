#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "floquet_avg/averaging.hpp"
#include "floquet_avg/pendulum.hpp"
#include "oracles.hpp"

using namespace floquet;
using PPM = PiecewisePolyMatrix;
using pendulum::PendulumParams;
namespace cf = pendulum::closed_form;

namespace {

constexpr double pi = std::numbers::pi;

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

// 3x3 system with strictly upper triangular J0 and random polynomial terms.
SeriesSystem random_system(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    const double T = 2.0;
    Mat j0{{0, u(rng), u(rng)}, {0, 0, u(rng)}, {0, 0, 0}};
    std::vector<PPM> terms;
    for (int order = 1; order <= 3; ++order) {
        std::vector<PPM::Piece> pieces;
        for (int k = 0; k < 2; ++k) {
            PPM::Piece pc(9);
            for (auto& p : pc) p = {u(rng), u(rng)};
            pieces.push_back(pc);
        }
        terms.emplace_back(T, std::vector<double>{0, 0.8, T}, 3, pieces);
    }
    return SeriesSystem(T, j0, terms);
}

}  // namespace

TEST_CASE("standard form with a zero generator leaves terms unchanged") {
    const PPM j1(1.0, {0, 0.5, 1}, 2, {{{1, 2}, {0}, {3}, {0, 0, 1}}, {{-1}, {2}, {0, 1}, {4}}});
    const SeriesSystem sys(1.0, Mat(2), {j1});
    const auto sf = standard_form(sys);
    for (double t : {0.0, 0.25, 0.5, 0.9, 1.0}) {
        CHECK(sf.X0.eval(t) == Mat::identity(2));
        CHECK(oracle::max_diff(sf.H[0].eval(t), j1.eval(t)) == 0.0);
    }
}

TEST_CASE("standard form of the pendulum") {
    const PendulumParams p{0.3, 1.0, 0.1};
    const auto sf = standard_form(pendulum::series_split(p));
    for (double t : {0.0, 1.0, 2.5, 4.0, 2 * pi}) {
        CHECK(oracle::max_diff(sf.X0.eval(t), Mat{{1, t}, {0, 1}}) <= 1e-15);
        CHECK(oracle::max_diff(sf.X0_inverse.eval(t), Mat{{1, -t}, {0, 1}}) <= 1e-15);
    }
    for (double t : {0.0, 0.7, 2.0, 3.0}) {
        const Mat ref = Mat{{-t, -t * t}, {1, t}} * p.eps;
        CHECK(oracle::max_diff(sf.H[0].eval(t), ref) <= 1e-14);
        CHECK(oracle::max_diff(sf.H[0].eval(t + pi), Mat{{-(t + pi), -(t + pi) * (t + pi)}, {1, t + pi}} * -p.eps) <= 1e-13);
    }
    // second-order term: [[-t w^2, -t (w^2 t - b w)], [w^2, w^2 t - b w]]
    const double w = p.omega, b = p.beta, t = 1.3;
    const Mat h2{{-t * w * w, -t * (w * w * t - b * w)}, {w * w, w * w * t - b * w}};
    CHECK(oracle::max_diff(sf.H[1].eval(t), h2) <= 1e-15);
}

TEST_CASE("non-nilpotent J0 is rejected") {
    CHECK_THROWS_AS(SeriesSystem(1.0, Mat{{0, 1}, {1, 0}}, {}), ModelError);
    CHECK_THROWS_AS(SeriesSystem(1.0, Mat{{1, 0}, {0, 0}}, {}), ModelError);
}

TEST_CASE("recursion reproduces the pendulum averages") {
    const PendulumParams p{0.37, 1.3, 0.21};
    const auto sys = pendulum::series_split(p);
    const auto sf = standard_form(sys);

    const auto e1 = run_recursion(sf.H, sys.period, 1);
    CHECK(oracle::max_diff(e1.A[0], cf::A1(p)) <= 1e-13);
    CHECK(e1.U.empty());

    const auto e2 = run_recursion(sf.H, sys.period, 2);
    CHECK(oracle::max_diff(e2.A[1], cf::A2(p)) <= 1e-12);
    CHECK(trace(e2.A[1]) * 2 * pi == Catch::Approx(-2 * pi * p.beta * p.omega).margin(1e-12));
    CHECK(trace(e2.A[1]) == Catch::Approx(-p.beta * p.omega).margin(1e-12));

    const auto e3 = run_recursion(sf.H, sys.period, 3);
    CHECK(std::abs(trace(e3.A[2])) <= 1e-12);
    CHECK(e3.U.size() == e3.A.size() - 1);

    CHECK_THROWS_AS(run_recursion(sf.H, sys.period, 0), OrderTooHighError);
    CHECK_THROWS_AS(run_recursion(sf.H, sys.period, 7), OrderTooHighError);
}

TEST_CASE("monodromy expansion of the pendulum") {
    const PendulumParams p{0.25, 0.9, 0.3};
    const auto res = average_system(pendulum::series_split(p), 4);
    const auto& m = res.monodromy;
    CHECK(oracle::max_diff(m.F0, cf::F0()) <= 1e-15);
    CHECK(oracle::max_diff(m.F_terms[1], cf::F1(p)) <= 1e-12);
    CHECK(oracle::max_diff(m.F_terms[2], cf::F2(p)) <= 1e-11);
    CHECK(m.trace_by_order[0] == 2.0);
    CHECK(std::abs(m.trace_by_order[1]) <= 1e-12);
    CHECK(m.trace_by_order[2] == Catch::Approx(cf::trace_F2(p)).margin(1e-11));
    CHECK(std::abs(m.trace_by_order[3]) <= 1e-11);
    for (int k = 1; k <= 4; ++k)
        CHECK(oracle::max_diff(m.partial_sums[k] - m.partial_sums[k - 1], m.F_terms[k]) <=
              1e-15 * (1 + max_abs(m.partial_sums[k])));
}

TEST_CASE("fourth-order trace matches the quartic boundary polynomial") {
    // tr(F_4) collected symbolically: 2 pi^2 b^2 w^2 + pi^5 b e^2 w / 3 - 4 pi^3 b w^3
    //   + pi^8 e^4 / 1260 - 4 pi^6 e^2 w^2 / 45 + 4 pi^4 w^4 / 3
    const PendulumParams p{0.2, 0.5, 0.4};
    const double w = p.omega, e = p.eps, b = p.beta;
    const double ref = 2 * std::pow(pi, 2) * b * b * w * w + std::pow(pi, 5) * b * e * e * w / 3 -
                       4 * std::pow(pi, 3) * b * std::pow(w, 3) + std::pow(pi, 8) * std::pow(e, 4) / 1260 -
                       4 * std::pow(pi, 6) * e * e * w * w / 45 + 4 * std::pow(pi, 4) * std::pow(w, 4) / 3;
    const auto res = average_system(pendulum::series_split(p), 5);
    CHECK(res.monodromy.trace_by_order[4] == Catch::Approx(ref).margin(1e-11));
    CHECK(std::abs(res.monodromy.trace_by_order[5]) <= 1e-10);
}

TEST_CASE("closure residuals vanish") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 5; ++rep) {
        const auto sys = random_system(rng);
        const auto res = average_system(sys, 5);
        CHECK(res.expansion.closure_ok());
        for (double r : res.expansion.closure_residuals) CHECK(r < 1e-12);
    }
    const auto res = average_system(pendulum::series_split({0.5, 2.0, 0.5}), 6);
    CHECK(res.expansion.closure_ok());
}

TEST_CASE("trace identity: tr A_j equals the average of tr J_j") {
    for (const PendulumParams p : {PendulumParams{0.3, 0.7, 0.2}, PendulumParams{1.0, 2.0, 0.5}}) {
        const auto res = average_system(pendulum::series_split(p), 4);
        CHECK(std::abs(trace(res.expansion.A[0])) <= 1e-11);
        CHECK(std::abs(trace(res.expansion.A[1]) + p.beta * p.omega) <= 1e-11);
        CHECK(std::abs(trace(res.expansion.A[2])) <= 1e-11);
        CHECK(std::abs(trace(res.expansion.A[3])) <= 1e-11);
    }
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        const auto sys = random_system(rng);
        const auto res = average_system(sys, 4);
        for (std::size_t j = 1; j <= 4; ++j) {
            const auto jj = sys.term(j);
            const auto br = jj.breakpoints();
            double integral = 0;
            for (std::size_t k = 0; k + 1 < br.size(); ++k)
                integral += trace(oracle::simpson([&](double t) { return jj.eval_piece(k, t); }, br[k], br[k + 1], 200));
            CHECK(trace(res.expansion.A[j - 1]) == Catch::Approx(integral / sys.period).margin(1e-11));
        }
    }
}

TEST_CASE("graded exponential matches the truncated power series") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Mat> A;
        for (int k = 0; k < 6; ++k) A.push_back(oracle::random_mat(rng, 2 + rep % 3, 0.5));
        const double T = 1.7;
        std::vector<Mat> scaled;
        for (const auto& a : A) scaled.push_back(a * T);
        const auto n = A.front().dim();
        const auto Z = graded_exponential(scaled, 6, Mat::identity(n), Mat(n));
        const auto ref = oracle::graded_exp_by_power_series(A, T, 6);
        for (int j = 0; j <= 6; ++j) CHECK(oracle::max_diff(Z[j], ref[j]) <= 1e-12 * (1 + max_abs(ref[j])));
    }
}

TEST_CASE("graded exponential reproduces the explicit low-order terms") {
    std::mt19937_64 rng(12);
    const Mat a1 = oracle::random_mat(rng, 2, 1), a2 = oracle::random_mat(rng, 2, 1),
              a3 = oracle::random_mat(rng, 2, 1), a4 = oracle::random_mat(rng, 2, 1);
    const double T = 2.0;
    const auto Z = graded_exponential(std::vector<Mat>{a1 * T, a2 * T, a3 * T, a4 * T}, 4, Mat::identity(2), Mat(2));
    const Mat z3 = a3 * T + (a1 * a2 + a2 * a1) * (T * T / 2) + a1 * a1 * a1 * (T * T * T / 6);
    const Mat z4 = a4 * T + (a1 * a3 + a2 * a2 + a3 * a1) * (T * T / 2) +
                   (a1 * a1 * a2 + a1 * a2 * a1 + a2 * a1 * a1) * (T * T * T / 6) + a1 * a1 * a1 * a1 * (std::pow(T, 4) / 24);
    CHECK(oracle::max_diff(Z[2], a2 * T + a1 * a1 * (T * T / 2)) <= 1e-14);
    CHECK(oracle::max_diff(Z[3], z3) <= 1e-13);
    CHECK(oracle::max_diff(Z[4], z4) <= 1e-13);
}

TEST_CASE("direct exponential against the partial sums") {
    {
        const auto sys = pendulum::series_split({0, 0, 0});
        const auto res = average_system(sys, 1);
        CHECK(oracle::max_diff(monodromy_direct(res.standard.X0, res.expansion, sys.period), res.monodromy.F0) <= 1e-15);
    }
    {
        // exp(T sum A) is not a good approximation here; the truncated
        // partial sum is. Reference errors from an independent scipy run.
        const PendulumParams p{0.1, 0.15, 0.05};
        const auto sys = pendulum::series_split(p);
        const auto res = average_system(sys, 2);
        const Mat exact = pendulum::exact_monodromy(p);
        const double err_direct = norm1(Mat(monodromy_direct(res.standard.X0, res.expansion, sys.period) - exact));
        const double err_sum = norm1(Mat(res.monodromy.partial_sums[2] - exact));
        CHECK(err_direct == Catch::Approx(3.2787732563171645).epsilon(1e-9));
        CHECK(err_sum == Catch::Approx(0.015031991974229553).epsilon(1e-9));
    }
    {
        const PendulumParams p{0.3, 0.4, 0.1};
        const auto sys = pendulum::series_split(p);
        const auto res = average_system(sys, 3);
        const Mat ref = Mat::cast(oracle::taylor_exp(res.expansion.sum_A(), sys.period));
        CHECK(oracle::max_diff(monodromy_direct(res.standard.X0, res.expansion, sys.period), cf::F0() * ref) <= 1e-11 * max_abs(ref));
    }
}

TEST_CASE("direct exponential agrees with the partial sum to the next order") {
    const std::vector<double> s{0.2, 0.1, 0.05, 0.025};
    for (int k = 1; k <= 4; ++k) {
        std::vector<double> diff;
        for (double si : s) {
            const auto sys = pendulum::series_split({si * 0.3, si * 1.0, si * 0.5});
            const auto res = average_system(sys, k);
            diff.push_back(norm1(Mat(monodromy_direct(res.standard.X0, res.expansion, sys.period) -
                                     res.monodromy.partial_sums[k])));
        }
        INFO("order " << k);
        CHECK(log_log_slope(s, diff) >= k + 0.5);
    }
}

TEST_CASE("partial sums converge with the expected order") {
    const std::vector<double> s{0.4, 0.2, 0.1, 0.05};
    for (int k = 1; k <= 4; ++k) {
        std::vector<double> err;
        for (double si : s) {
            const PendulumParams p{si * 0.3, si * 1.0, si * 0.5};
            const auto res = average_system(pendulum::series_split(p), k);
            err.push_back(norm1(Mat(pendulum::exact_monodromy(p) - res.monodromy.partial_sums[k])));
        }
        INFO("order " << k);
        CHECK(log_log_slope(s, err) >= k + 0.5);
    }
}

TEST_CASE("long double instantiation agrees with double") {
    const PendulumParams p{0.6, 1.5, 0.3};
    const auto d = average_system(pendulum::series_split<double>(p), 4);
    const auto l = average_system(pendulum::series_split<long double>(p), 4);
    for (int k = 0; k <= 4; ++k)
        CHECK(oracle::max_diff(d.monodromy.partial_sums[k], Mat::cast(l.monodromy.partial_sums[k])) <= 1e-9);
}
