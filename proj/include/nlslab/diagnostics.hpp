#pragma once

#include <vector>

#include "nlslab/modulation.hpp"

namespace nlslab {

/// Energy at eigenvalue mu, normalized so the ground state is a critical
/// point: E(u) = 1/2 int eps^{-N} (eps^2 |grad u|^2 + mu |u|^2) dx
///             - lambda/(p+1) int eps^{-N} |u|^{p+1} dx.
double energy_functional(const Field& u, double mu, double eps, const NonlinearitySpec& nl);

struct SolitonEnergyRow {
    double e_u = 0.0;        // E_{mu_j}(u_j)
    double e_eta = 0.0;      // E_{mu_j}(eta_{mu_j,eps})
    double gap = 0.0;        // e_u - e_eta
    double coercivity = 0.0; // <L w_j, w_j>_eps
    double w_h1 = 0.0;
};

struct EnergyReport {
    std::vector<SolitonEnergyRow> per_soliton;
};

/// Per-soliton energy gaps of the truncated pieces against the ground state
/// at the extracted eigenvalue, with coercivity values of the perturbations.
EnergyReport energy_gap(const Decomposition& dec, const TruncationSet& cuts,
                        const GroundStateProfile& base);

struct CoercivityResult {
    double value = 0.0;
    bool projected = false;      // w had tangent components that were removed
    double projection_size = 0.0;
};

/// <L w, w>_eps on the skew-orthogonal complement of the tangent frame at
/// sigma = (0, 0, 0, mu); w is projected first when it is not already
/// skew-orthogonal.
CoercivityResult coercivity_form(const GroundStateProfile& profile, const Field& w);

/// Remove tangent-frame components so that w_eps(w, z_m) = 0 for all m.
Field skew_project(const GroundStateProfile& profile, const Field& w);

struct TaylorRemainders {
    double r2 = 0.0;
    double r3 = 0.0;
    double n_norm = 0.0; // duality estimate of ||N_eta(w)||_{H^-1}
};

/// Remainders of the nonlinear-energy Taylor expansion at the profile:
/// second and third order, plus the dual-norm estimate of the pointwise
/// nonlinear remainder against 64 low-wavenumber modes and the tangent
/// frame.
TaylorRemainders taylor_remainders(const GroundStateProfile& profile, const Field& w);

} // namespace nlslab
