#pragma once

#include <cmath>
#include <vector>

#include "nlslab/ground_state.hpp"

namespace nlslab::detail {

// Immutable base solution at mu = eps = 1, shared between scaled family
// members. 1D: closed form A sech^b(c r). 2D: axis cosine series of the
// spectral-renormalization fixed point, switched to an exponential tail
// where the field drops below 1e-10 of its peak.
struct BaseProfile {
    NonlinearitySpec nl;
    int dim;

    bool closed_form = false;
    double amp = 0.0, expb = 0.0, cc = 0.0;

    std::vector<double> cos_coeff; // 2D: A_s for cos(k_s r), k_s = 2 pi s / solve_box
    double solve_box = 0.0;
    double tail_r = 0.0, tail_log = 0.0, tail_slope = 0.0;

    double alpha = 1.0;
    double base_l2 = 0.0;

    std::vector<double> samples; // uniform radial samples, serialization payload
    double samples_dr = 0.0;

    explicit BaseProfile(const NonlinearitySpec& n) : nl(n), dim(n.dim) {}

    double value(double r) const {
        r = std::abs(r);
        if (closed_form) {
            double s = 1.0 / std::cosh(cc * r);
            return amp * std::pow(s, expb);
        }
        if (r >= tail_r) return std::exp(tail_log - tail_slope * (r - tail_r));
        double acc = 0.0;
        double k0 = 2.0 * Grid::kPi / solve_box;
        for (std::size_t s = 0; s < cos_coeff.size(); ++s)
            acc += cos_coeff[s] * std::cos(k0 * static_cast<double>(s) * r);
        return acc;
    }

    double deriv(double r) const {
        double sign = r < 0 ? -1.0 : 1.0;
        r = std::abs(r);
        if (closed_form) {
            double s = 1.0 / std::cosh(cc * r);
            return -sign * amp * expb * cc * std::pow(s, expb) * std::tanh(cc * r);
        }
        if (r >= tail_r)
            return -sign * tail_slope * std::exp(tail_log - tail_slope * (r - tail_r));
        double acc = 0.0;
        double k0 = 2.0 * Grid::kPi / solve_box;
        for (std::size_t s = 1; s < cos_coeff.size(); ++s) {
            double k = k0 * static_cast<double>(s);
            acc -= cos_coeff[s] * k * std::sin(k * r);
        }
        return sign * acc;
    }
};

} // namespace nlslab::detail
