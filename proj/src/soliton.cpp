#include "nlslab/soliton.hpp"

#include <cmath>
#include <sstream>

namespace nlslab {

namespace {

void check_placement(const SolitonParams& sigma, double eps, const Grid& g) {
    double margin = 8.0 * eps / std::sqrt(sigma.mu);
    for (int a = 0; a < g.dim(); ++a) {
        double c = g.wrap(sigma.a[a]);
        double seam_dist = 0.5 * g.box_length() - std::abs(c);
        if (seam_dist < margin) {
            std::ostringstream os;
            os << "soliton center component " << sigma.a[a] << " within " << seam_dist
               << " of the box seam (needs >= " << margin << ")";
            throw PlacementError(os.str());
        }
    }
}

} // namespace

Field soliton_field(const SolitonParams& sigma, const GroundStateProfile& base, double eps,
                    const Grid& g) {
    check_placement(sigma, eps, g);
    GroundStateProfile prof = base.with_parameters(sigma.mu, eps);
    Field out(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto x = g.point(i);
        double d0 = g.wrap(x[0] - sigma.a[0]);
        double d1 = g.dim() == 2 ? g.wrap(x[1] - sigma.a[1]) : 0.0;
        double r = g.dim() == 1 ? std::abs(d0) : std::hypot(d0, d1);
        double theta = 0.5 * (sigma.v[0] * d0 + sigma.v[1] * d1) / eps + sigma.gamma;
        out[i] = prof.value(r) * Complex(std::cos(theta), std::sin(theta));
    }
    return out;
}

Field sum_solitons(const ManifoldPoint& point, const GroundStateProfile& base, const Grid& g) {
    if (point.solitons.empty()) throw DomainError("manifold point has no solitons");
    Field acc = soliton_field(point.solitons[0], base, point.eps, g);
    for (std::size_t l = 1; l < point.k(); ++l)
        acc += soliton_field(point.solitons[l], base, point.eps, g);
    return acc;
}

std::vector<Field> tangent_basis(const ManifoldPoint& point, std::size_t j,
                                 const GroundStateProfile& base, const Grid& g) {
    if (j >= point.k()) throw DomainError("tangent_basis soliton index out of range");
    const SolitonParams& sigma = point.solitons[j];
    const double eps = point.eps;
    const int dim = g.dim();
    GroundStateProfile prof = base.with_parameters(sigma.mu, eps);

    std::vector<Field> z(2 * dim + 2, Field(g));
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto x = g.point(i);
        double d0 = g.wrap(x[0] - sigma.a[0]);
        double d1 = dim == 2 ? g.wrap(x[1] - sigma.a[1]) : 0.0;
        double r = dim == 1 ? std::abs(d0) : std::hypot(d0, d1);
        double val = prof.value(r);
        double der = prof.radial_deriv(r);
        double dmu = prof.mu_deriv(r);
        double rinv = r > 1e-14 ? 1.0 / r : 0.0;
        double theta = 0.5 * (sigma.v[0] * d0 + sigma.v[1] * d1) / eps + sigma.gamma;
        Complex phase(std::cos(theta), std::sin(theta));

        z[0][i] = phase * Complex(-eps * der * d0 * rinv, 0.0);
        if (dim == 2) z[1][i] = phase * Complex(-eps * der * d1 * rinv, 0.0);
        z[dim][i] = phase * Complex(0.0, d0 / eps * val);
        if (dim == 2) z[dim + 1][i] = phase * Complex(0.0, d1 / eps * val);
        z[2 * dim][i] = phase * Complex(0.0, val);
        z[2 * dim + 1][i] = phase * Complex(dmu, 0.0);
    }
    return z;
}

Eigen::MatrixXd omega_matrix_from_basis(const std::vector<Field>& basis, double eps) {
    const int n = static_cast<int>(basis.size());
    Eigen::MatrixXd omega(n, n);
    for (int m = 0; m < n; ++m) {
        omega(m, m) = 0.0; // w(u, u) = 0 exactly
        for (int l = m + 1; l < n; ++l) {
            double w = pairing(basis[m], basis[l], eps, PairingKind::symplectic);
            omega(m, l) = w;
            omega(l, m) = -w;
        }
    }
    return omega;
}

Eigen::MatrixXd omega_matrix(const ManifoldPoint& point, std::size_t j,
                             const GroundStateProfile& base, const Grid& g) {
    auto basis = tangent_basis(point, j, base, g);
    Eigen::MatrixXd omega = omega_matrix_from_basis(basis, point.eps);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(omega);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > 1e12) {
        std::ostringstream os;
        os << "symplectic frame degenerate at soliton " << j << " (condition "
           << (smin > 0 ? smax / smin : std::numeric_limits<double>::infinity()) << ")";
        throw DegeneracyError(os.str());
    }
    return omega;
}

double cross_overlap(const ManifoldPoint& point, std::size_t i, std::size_t j,
                     const GroundStateProfile& base, const Grid& g) {
    if (i == j) throw DomainError("cross_overlap requires distinct solitons");
    auto zi = tangent_basis(point, i, base, g);
    auto zj = tangent_basis(point, j, base, g);
    double worst = 0.0;
    for (const auto& u : zi)
        for (const auto& v : zj)
            worst = std::max(worst, std::abs(pairing(u, v, point.eps, PairingKind::symplectic)));
    return worst;
}

Eigen::MatrixXd omega_block_form(double m, double mprime, int dim) {
    int n = 2 * dim + 2;
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < dim; ++a) {
        omega(a, dim + a) = -m;
        omega(dim + a, a) = m;
    }
    omega(2 * dim, 2 * dim + 1) = mprime;
    omega(2 * dim + 1, 2 * dim) = -mprime;
    return omega;
}

} // namespace nlslab
