#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "nlslab/ground_state.hpp"

namespace nlslab {

/// One soliton's parameters sigma = (a, v, gamma, mu): center, velocity
/// parameter (the boost phase is v.(x-a)/(2 eps)), phase (stored unwrapped),
/// and eigenvalue. Only the first dim entries of a, v are used.
struct SolitonParams {
    std::array<double, 2> a{0.0, 0.0};
    std::array<double, 2> v{0.0, 0.0};
    double gamma = 0.0;
    double mu = 1.0;
};

/// Point on the k-soliton manifold: ordered parameter tuples plus the run's
/// Planck parameter.
struct ManifoldPoint {
    std::vector<SolitonParams> solitons;
    double eps = 1.0;

    std::size_t k() const { return solitons.size(); }
};

/// Moving soliton e^{i(v.(x-a)/(2 eps) + gamma)} eta_{mu,eps}(x - a) sampled
/// on the grid. The offset x - a is wrapped to the nearest periodic image so
/// the boost-phase seam falls where the profile is exponentially small.
/// Throws PlacementError if the center sits closer than 8 eps / sqrt(mu) to
/// the box seam.
Field soliton_field(const SolitonParams& sigma, const GroundStateProfile& base, double eps,
                    const Grid& g);

Field sum_solitons(const ManifoldPoint& point, const GroundStateProfile& base, const Grid& g);

/// Transformed tangent frame at soliton j, ordered
/// (z_{j,1..N}, z_{j,N+1..2N}, z_{j,2N+1}, z_{j,2N+2})
///   = T_j(-eps grad eta), T_j((i x / eps) eta), T_j(i eta), T_j(d_mu eta).
std::vector<Field> tangent_basis(const ManifoldPoint& point, std::size_t j,
                                 const GroundStateProfile& base, const Grid& g);

/// Symplectic Gram matrix Omega^{m,n} = <z_{j,m}, i z_{j,n}>_eps by
/// quadrature. Its analytic block form is
///   [ 0   -m 1   0    0  ]
///   [ m 1   0    0    0  ]
///   [ 0     0    0    m' ]
///   [ 0     0   -m'   0  ]
/// Throws DegeneracyError when the condition number exceeds 1e12.
Eigen::MatrixXd omega_matrix(const ManifoldPoint& point, std::size_t j,
                             const GroundStateProfile& base, const Grid& g);

Eigen::MatrixXd omega_matrix_from_basis(const std::vector<Field>& basis, double eps);

/// max_{m,n} |w_eps(z_{i,m}, z_{j,n})| across two solitons' frames.
double cross_overlap(const ManifoldPoint& point, std::size_t i, std::size_t j,
                     const GroundStateProfile& base, const Grid& g);

/// Analytic block form of the symplectic matrix built from m(mu), m'(mu).
Eigen::MatrixXd omega_block_form(double m, double mprime, int dim);

} // namespace nlslab
