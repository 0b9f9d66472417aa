#pragma once

#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/soliton.hpp"

namespace nlslab {

/// Leading-order particle system in scaled time:
///   dv/dt' = -2 grad V_eps(a),  da/dt' = v,
///   dgamma/dt' = (mu - V_eps(a) + sign * v^2/4) / eps,  dmu/dt' = 0.
/// The quarter-speed phase term carries a configurable sign (default +1);
/// the free-soliton tracking experiment pins it.
struct ParticleState {
    std::vector<SolitonParams> bodies;
    double t_scaled = 0.0;
    double eps = 1.0;
    int dim = 1;
    PotentialSpec potential;
    int phase_sign = +1;
};

struct ParticleDerivatives {
    std::vector<SolitonParams> dot; // component-wise rates, mu rate is zero
};

ParticleDerivatives ode_rhs(const ParticleState& state);

/// v^2/4 + V_eps(a), conserved along the leading-order flow.
double particle_invariant(const ParticleState& state, std::size_t body);

struct ParticleSeries {
    std::vector<double> t;                        // scaled times, every step
    std::vector<std::vector<SolitonParams>> s;    // per time, per body
    double max_invariant_drift = 0.0;             // relative, over the run

    // Trapezoid reconstruction of the integral form of the dynamics from the
    // stored series; residuals against the stepped values.
    double integral_residual_v = 0.0;
    double integral_residual_a = 0.0;
    double integral_residual_gamma = 0.0;

    std::vector<SolitonParams> at_time(double t_scaled) const;
};

/// Classical fourth-order one-step integration with fixed step; integrates
/// backward when t_end < t0. A step that moves the per-body invariant by
/// more than 1e-8 relative is rejected with IntegratorError.
ParticleSeries integrate(const ParticleState& initial, double t_end, double dt);

} // namespace nlslab
