// golden.hpp
//
// Derivative-free one-dimensional minimization: golden-section search on a
// bracket, plus a geometric scan that locates the bracket for objectives that
// blow up at both ends of a positive interval.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

namespace epsopt {

struct ScalarMinimum {
    double x = 0.0;
    double fx = 0.0;
};

/// Golden-section search for a minimum of `f` on [lo, hi].
///
/// Stops once the bracket is narrower than max(abs_tol, rel_tol * |x|).
template <class F>
ScalarMinimum golden_section_minimize(F&& f, double lo, double hi, double rel_tol,
                                      double abs_tol = 0.0, int max_iter = 400) {
    if (!(lo <= hi)) throw std::invalid_argument("golden-section bracket must satisfy lo <= hi");
    constexpr double inv_phi = 0.6180339887498949;  // 1/phi
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (a + b);
        if (b - a <= std::max(abs_tol, rel_tol * std::abs(mid))) break;
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? ScalarMinimum{c, fc} : ScalarMinimum{d, fd};
}

/// Scans `points` geometrically spaced abscissae on [lo, hi] (lo > 0), brackets
/// the smallest sample by its neighbours and refines with golden-section search.
///
/// Throws std::runtime_error if the smallest sample sits on the boundary, i.e.
/// the objective does not rise on both sides within the interval.
template <class F>
ScalarMinimum bracket_and_minimize(F&& f, double lo, double hi, std::size_t points,
                                   double rel_tol) {
    if (!(lo > 0.0 && hi > lo) || points < 3)
        throw std::invalid_argument("geometric scan needs 0 < lo < hi and at least 3 points");
    const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(points - 1));
    std::size_t best = 0;
    double best_f = f(lo);
    double x = lo;
    for (std::size_t i = 1; i < points; ++i) {
        x = (i + 1 == points) ? hi : x * ratio;
        const double fx = f(x);
        if (fx < best_f) {
            best_f = fx;
            best = i;
        }
    }
    if (best == 0 || best + 1 == points)
        throw std::runtime_error("minimizer failed to bracket: minimum at scan boundary");
    const double left = lo * std::pow(ratio, static_cast<double>(best - 1));
    const double right = lo * std::pow(ratio, static_cast<double>(best + 1));
    auto m = golden_section_minimize(f, left, right, rel_tol);
    if (best_f < m.fx) return {lo * std::pow(ratio, static_cast<double>(best)), best_f};
    return m;
}

}  // namespace epsopt
