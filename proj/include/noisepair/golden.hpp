#pragma once

#include <cmath>
#include <utility>

#include "noisepair/errors.hpp"

namespace noisepair {

struct GoldenResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// One-dimensional golden-section minimization over [lo, hi]. Stops when the
// bracket width drops below rel_tol relative to the bracket magnitude, or
// after max_iters shrink steps (converged stays false in that case). Assumes
// a unimodal objective; callers guard the bracket themselves.
template <typename F>
GoldenResult golden_section_minimize(F&& f, double lo, double hi, double rel_tol = 1e-5,
                                     int max_iters = 200) {
    if (!(lo < hi)) {
        throw InvalidParameterError("golden_section_minimize requires lo < hi");
    }
    if (!(rel_tol > 0.0)) {
        throw InvalidParameterError("golden_section_minimize requires a positive tolerance");
    }
    constexpr double kInvPhi = 0.6180339887498949;    // 1/phi
    constexpr double kInvPhi2 = 0.3819660112501051;   // 1/phi^2

    double a = lo;
    double b = hi;
    double c = a + kInvPhi2 * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);

    GoldenResult result;
    while (result.iterations < max_iters) {
        const double scale = 0.5 * (std::fabs(a) + std::fabs(b));
        if (b - a <= rel_tol * scale) {
            result.converged = true;
            break;
        }
        ++result.iterations;
        // Ties keep the left interval: objectives that saturate to a plateau
        // for large x (the 255-clamp does this) would otherwise trap the
        // search on the plateau.
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = a + kInvPhi2 * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    if (fc < fd) {
        result.x = c;
        result.fx = fc;
    } else {
        result.x = d;
        result.fx = fd;
    }
    return result;
}

}  // namespace noisepair
