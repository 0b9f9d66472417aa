#pragma once

#include <Eigen/Dense>

#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/soliton.hpp"

namespace nlslab {

/// Result of the skew-orthogonal splitting psi = sum_l Psi_{sigma_l} + w.
struct Decomposition {
    ManifoldPoint point;
    Field w;
    Eigen::VectorXd residual; // G at convergence, length k(2N+2)
    int iterations = 0;
    bool mu_projected = false; // Newton tried to leave the mu interval
};

struct DecomposeOptions {
    int max_iterations = 50;
    int max_backtracks = 5;
    double tolerance_factor = 1e-10; // tolerance = factor * m(mu_inf)
    MuInterval mu_box{};
    // neighborhood radius for the a-posteriori ||w|| check; 0 picks
    // a quarter of the smallest mass slope over the mu interval
    double delta = 0.0;
};

/// G_{j,m} = <psi - sum Psi, i z_{j,m}>_eps = w_eps(psi - sum Psi, z_{j,m}).
Eigen::VectorXd skew_residual(const Field& psi, const ManifoldPoint& point,
                              const GroundStateProfile& base);

/// Newton iteration on G with the block-diagonal symplectic Gram matrix as
/// the leading-order Jacobian, full steps with residual-norm backtracking.
/// Throws DecompositionError when the iteration fails to converge.
Decomposition decompose(const Field& psi, const ManifoldPoint& guess,
                        const GroundStateProfile& base, const DecomposeOptions& opts = {});

/// Radial quintic-smoothstep cutoffs: 1 on B_L(c_j), 0 outside B_2L(c_j).
struct TruncationSet {
    std::vector<std::array<double, 2>> centers;
    double inner_radius = 5.0;

    double cutoff(std::size_t j, const std::array<double, 2>& x, const Grid& g) const;
};

/// Per-peak pieces u_j = T_j^{-1}(phi_j psi) (last peak takes the remainder)
/// and w_j defined the same way from psi - Psi_{sigma_j}.
struct PeakDecomposition {
    std::vector<Field> u;
    std::vector<Field> w;
};

PeakDecomposition truncate_peaks(const Field& psi, const Decomposition& dec,
                                 const TruncationSet& cuts, const GroundStateProfile& base);

/// Symmetry transform T_{a v gamma} and its inverse acting on sampled grid
/// fields (spectral translation plus the boost/gauge phase).
Field apply_symmetry(const Field& u, const SolitonParams& sigma, double eps);
Field apply_symmetry_inverse(const Field& u, const SolitonParams& sigma, double eps);

struct TrajectoryFrame {
    double t_unscaled = 0.0;
    std::vector<SolitonParams> solitons;
};

/// Deviation coefficients of a parameter trajectory from the leading-order
/// vector field, in unscaled time:
///   beta_{j,m}    = da_{j,m}/dt / eps^2 - v_{j,m} / eps
///   beta_{j,N+m}  = dv_{j,m}/dt / 2 + eps d_m V_eps(a_j)
///   beta_{j,2N+1} = dgamma/dt - (da/dt . v) / (2 eps) - mu + |v|^2/4 + V_eps(a_j)
///   beta_{j,2N+2} = dmu/dt
/// Time derivatives use centered differences (second-order one-sided at the
/// ends). resolution_warning is set when the estimated difference error
/// exceeds the measured coefficients.
struct BetaSeries {
    std::vector<Eigen::VectorXd> beta; // one vector of length k(2N+2) per frame
    bool resolution_warning = false;
};

BetaSeries beta_from_trajectory(const std::vector<TrajectoryFrame>& frames,
                                const PotentialSpec& pot, double eps, int dim);

/// Correction vector field of the modulation equations:
///   X = Omega^{-1} [ <z_{i,n}, sum_l (T_l N_{eta_l}(w_l) + R_l T_l(eta_l + w_l))>
///                    - sum_l beta_l . <J z_{i,n}, K_l w_l> ]
/// with N_eta(w) = f(eta + w) - f(eta) - f'(eta) w pointwise and
/// R_l(x) = V_eps(x) - V_eps(a_l) - grad V_eps(a_l} . (x - a_l).
Eigen::VectorXd correction_terms(const Decomposition& dec, const TruncationSet& cuts,
                                 const PotentialSpec& pot, const Eigen::VectorXd& beta,
                                 const GroundStateProfile& base);

/// Full k(2N+2) symplectic Gram matrix including the (exponentially small)
/// cross-soliton blocks.
Eigen::MatrixXd full_omega(const ManifoldPoint& point, const GroundStateProfile& base,
                           const Grid& g);

} // namespace nlslab
