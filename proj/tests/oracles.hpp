#pragma once

// Independent reference computations used only by the tests. None of these
// go through the library's polynomial calculus or averaging code.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "floquet_avg/smallmat.hpp"

namespace oracle {

using floquet::BasicMat;
using floquet::Mat;

/// Composite Simpson rule for a matrix function on [a, b].
inline Mat simpson(const std::function<Mat(double)>& f, double a, double b, int intervals = 2000) {
    const double h = (b - a) / intervals;
    Mat acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * (h / 3);
}

/// Plain Taylor series in long double, no scaling; for ||M t|| of order one.
inline BasicMat<long double> taylor_exp(const Mat& m, double t, int terms = 80) {
    const auto a = BasicMat<long double>::cast(m) * static_cast<long double>(t);
    auto sum = BasicMat<long double>::identity(m.dim());
    auto term = sum;
    for (int k = 1; k < terms; ++k) {
        term = term * a;
        term *= 1.0L / k;
        sum += term;
    }
    return sum;
}

/// exp(t [[0,1],[w^2,0]]) in closed form.
inline Mat hyperbolic_exp(double w, double t) {
    const double c = std::cosh(w * t), s = std::sinh(w * t);
    return {{c, s / w}, {w * s, c}};
}

/// Matrix polynomial in a formal variable s, truncated at degree N.
struct MatPoly {
    std::vector<Mat> c;  // c[k] multiplies s^k

    MatPoly operator*(const MatPoly& o) const {
        const std::size_t n = c.front().dim();
        MatPoly r{std::vector<Mat>(c.size(), Mat(n))};
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; i + j < c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
        return r;
    }
};

/// s^j coefficients of exp(sum_k s^k A_k T), truncated power series in X.
inline std::vector<Mat> graded_exp_by_power_series(const std::vector<Mat>& A, double T, int N) {
    const std::size_t n = A.front().dim();
    MatPoly X{std::vector<Mat>(N + 1, Mat(n))};
    for (int k = 1; k <= N && k <= static_cast<int>(A.size()); ++k) X.c[k] = A[k - 1] * T;
    MatPoly sum{std::vector<Mat>(N + 1, Mat(n))};
    sum.c[0] = Mat::identity(n);
    MatPoly power = sum;
    double fact = 1;
    for (int m = 1; m <= N; ++m) {
        power = power * X;
        fact *= m;
        for (int j = 0; j <= N; ++j) sum.c[j] += power.c[j] * (1.0 / fact);
    }
    return sum.c;
}

inline Mat random_mat(std::mt19937_64& rng, std::size_t n, double norm_bound) {
    std::uniform_real_distribution<double> u(-1, 1);
    Mat m(n);
    for (auto& x : m.data()) x = u(rng);
    const double s = floquet::norm1(m);
    return s > 0 ? m * (norm_bound * std::uniform_real_distribution<double>(0.1, 1)(rng) / s) : m;
}

inline double max_diff(const Mat& a, const Mat& b) { return floquet::max_abs(Mat(a - b)); }

}  // namespace oracle
