#pragma once

// Shared helpers for the test suites: independent quadrature and
// finite-difference oracles, deterministic random fields, slope fits.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "nlslab/grid.hpp"

namespace testsupport {

// Adaptive Simpson quadrature, the reference integrator for closed-form
// integrands (independent of the library's rectangle rule).
inline double adaptive_simpson_(const std::function<double(double)>& f, double a, double b,
                                double fa, double fm, double fb, double whole, double tol,
                                int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Fourth-order centered finite difference, the reference derivative.
inline double fd4(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

// Deterministic smooth random field from low-wavenumber modes.
inline nlslab::Field random_smooth_field(const nlslab::Grid& g, std::uint64_t seed,
                                         int max_mode = 16) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    nlslab::Field out(g);
    for (int s = -max_mode; s <= max_mode; ++s) {
        nlslab::Complex c(gauss(rng), gauss(rng));
        double k = 2.0 * nlslab::Grid::kPi * s / g.box_length();
        for (std::size_t i = 0; i < g.size(); ++i) {
            double x = g.point(i)[0];
            out[i] += c * nlslab::Complex(std::cos(k * x), std::sin(k * x));
        }
    }
    return out;
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace testsupport
