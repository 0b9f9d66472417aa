#include "nlslab/modulation.hpp"

#include <cmath>
#include <sstream>

namespace nlslab {

namespace {

int block_size(int dim) { return 2 * dim + 2; }

Eigen::VectorXd residual_vector(const Field& diff, const ManifoldPoint& point,
                                const GroundStateProfile& base, const Grid& g) {
    const int nb = block_size(g.dim());
    Eigen::VectorXd out(static_cast<int>(point.k()) * nb);
    for (std::size_t j = 0; j < point.k(); ++j) {
        auto basis = tangent_basis(point, j, base, g);
        for (int m = 0; m < nb; ++m)
            out(static_cast<int>(j) * nb + m) =
                pairing(diff, basis[m], point.eps, PairingKind::symplectic);
    }
    return out;
}

// Move sigma along the parameter chart in which the tangent fields are
// exactly the basis vectors. With the boost multiplier sampled relative to
// the center, d/dv Psi = z_b / 2 directly, so only the translation rows
// carry a gamma coupling (the v/2 term of the transformed frame).
void apply_chart_update(SolitonParams& s, const Eigen::VectorXd& dtau, int dim, double eps) {
    for (int n = 0; n < dim; ++n) {
        s.a[n] += eps * dtau(n);
        s.gamma += 0.5 * s.v[n] * dtau(n);
    }
    for (int n = 0; n < dim; ++n) s.v[n] += 2.0 * dtau(dim + n);
    s.gamma += dtau(2 * dim);
    s.mu += dtau(2 * dim + 1);
}

double quintic_smoothstep(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

} // namespace

Eigen::VectorXd skew_residual(const Field& psi, const ManifoldPoint& point,
                              const GroundStateProfile& base) {
    Field diff = psi - sum_solitons(point, base, psi.grid());
    return residual_vector(diff, point, base, psi.grid());
}

Decomposition decompose(const Field& psi, const ManifoldPoint& guess,
                        const GroundStateProfile& base, const DecomposeOptions& opts) {
    const Grid& g = psi.grid();
    const int dim = g.dim();
    const int nb = block_size(dim);
    const double eps = guess.eps;

    double m_inf = mass_and_derivative(base, opts.mu_box.inf).first;
    const double tol = opts.tolerance_factor * m_inf;

    ManifoldPoint point = guess;
    Eigen::VectorXd G = skew_residual(psi, point, base);
    double gnorm = G.lpNorm<Eigen::Infinity>();
    bool mu_projected = false;

    int iter = 0;
    for (; iter < opts.max_iterations && gnorm > tol; ++iter) {
        // Leading-order Jacobian in the chart is the block-diagonal Gram
        // matrix; cross blocks are exponentially small.
        std::vector<Eigen::VectorXd> dtau(point.k());
        for (std::size_t j = 0; j < point.k(); ++j) {
            Eigen::MatrixXd omega = omega_matrix(point, j, base, g);
            dtau[j] = omega.partialPivLu().solve(
                -G.segment(static_cast<int>(j) * nb, nb));
        }

        double scale = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            ManifoldPoint trial = point;
            for (std::size_t j = 0; j < point.k(); ++j) {
                apply_chart_update(trial.solitons[j], scale * dtau[j], dim, eps);
                double& mu = trial.solitons[j].mu;
                if (mu <= opts.mu_box.inf || mu >= opts.mu_box.sup) {
                    double margin = 1e-6 * (opts.mu_box.sup - opts.mu_box.inf);
                    mu = std::min(std::max(mu, opts.mu_box.inf + margin),
                                  opts.mu_box.sup - margin);
                    mu_projected = true;
                }
            }
            Eigen::VectorXd Gt = skew_residual(psi, trial, base);
            double tnorm = Gt.lpNorm<Eigen::Infinity>();
            if (tnorm < gnorm) {
                point = trial;
                G = Gt;
                gnorm = tnorm;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }

    if (gnorm > tol) {
        std::ostringstream os;
        os << "skew-orthogonal decomposition did not converge: residual " << gnorm
           << " > " << tol << " after " << iter << " iterations";
        throw DecompositionError(os.str());
    }

    Decomposition dec{point, psi - sum_solitons(point, base, g), G, iter, mu_projected};

    // a-posteriori neighborhood check: the splitting is only meaningful for
    // states close to the manifold
    double delta = opts.delta;
    if (delta == 0.0)
        delta = 0.25 * std::min(mass_and_derivative(base, opts.mu_box.inf).second,
                                mass_and_derivative(base, opts.mu_box.sup).second);
    double wn = h1_norm(dec.w, eps);
    if (wn > delta) {
        std::ostringstream os;
        os << "perturbation norm " << wn << " exceeds the neighborhood radius " << delta
           << "; the state left the tracked neighborhood of the manifold";
        throw DecompositionError(os.str());
    }
    return dec;
}

double TruncationSet::cutoff(std::size_t j, const std::array<double, 2>& x, const Grid& g) const {
    double d0 = g.wrap(x[0] - centers[j][0]);
    double d1 = g.dim() == 2 ? g.wrap(x[1] - centers[j][1]) : 0.0;
    double r = g.dim() == 1 ? std::abs(d0) : std::hypot(d0, d1);
    double L = inner_radius;
    return 1.0 - quintic_smoothstep((r - L) / L);
}

Field apply_symmetry(const Field& u, const SolitonParams& sigma, double eps) {
    const Grid& g = u.grid();
    Field shifted = translate(u, {sigma.a[0], g.dim() == 2 ? sigma.a[1] : 0.0});
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto x = g.point(i);
        double d0 = g.wrap(x[0] - sigma.a[0]);
        double d1 = g.dim() == 2 ? g.wrap(x[1] - sigma.a[1]) : 0.0;
        double theta = 0.5 * (sigma.v[0] * d0 + sigma.v[1] * d1) / eps + sigma.gamma;
        shifted[i] *= Complex(std::cos(theta), std::sin(theta));
    }
    return shifted;
}

Field apply_symmetry_inverse(const Field& u, const SolitonParams& sigma, double eps) {
    const Grid& g = u.grid();
    Field out = u;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto x = g.point(i);
        double d0 = g.wrap(x[0] - sigma.a[0]);
        double d1 = g.dim() == 2 ? g.wrap(x[1] - sigma.a[1]) : 0.0;
        double theta = 0.5 * (sigma.v[0] * d0 + sigma.v[1] * d1) / eps + sigma.gamma;
        out[i] *= Complex(std::cos(theta), -std::sin(theta));
    }
    return translate(out, {-sigma.a[0], g.dim() == 2 ? -sigma.a[1] : 0.0});
}

PeakDecomposition truncate_peaks(const Field& psi, const Decomposition& dec,
                                 const TruncationSet& cuts, const GroundStateProfile& base) {
    const Grid& g = psi.grid();
    const ManifoldPoint& point = dec.point;
    const std::size_t k = point.k();
    if (cuts.centers.size() != k) throw TruncationGeometryError("one cutoff center per soliton");

    // A foreign soliton inside a cutoff's outer ball would be clipped.
    for (std::size_t j = 0; j + 1 < k; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            if (i == j) continue;
            double d0 = g.wrap(point.solitons[i].a[0] - cuts.centers[j][0]);
            double d1 = g.dim() == 2 ? g.wrap(point.solitons[i].a[1] - cuts.centers[j][1]) : 0.0;
            double r = g.dim() == 1 ? std::abs(d0) : std::hypot(d0, d1);
            if (r <= 2.0 * cuts.inner_radius) {
                std::ostringstream os;
                os << "soliton " << i << " lies inside the 2L ball of cutoff " << j;
                throw TruncationGeometryError(os.str());
            }
        }
    }

    PeakDecomposition out;
    out.u.reserve(k);
    out.w.reserve(k);

    Field remainder_u = psi;
    Field remainder_w = dec.w;
    for (std::size_t j = 0; j + 1 < k; ++j) {
        Field cut_u(g), cut_w(g);
        Field psij = soliton_field(point.solitons[j], base, point.eps, g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double phi = cuts.cutoff(j, g.point(i), g);
            cut_u[i] = phi * psi[i];
            cut_w[i] = phi * (psi[i] - psij[i]);
        }
        remainder_u -= cut_u;
        remainder_w -= cut_w;
        out.u.push_back(apply_symmetry_inverse(cut_u, point.solitons[j], point.eps));
        out.w.push_back(apply_symmetry_inverse(cut_w, point.solitons[j], point.eps));
    }
    out.u.push_back(apply_symmetry_inverse(remainder_u, point.solitons[k - 1], point.eps));
    out.w.push_back(apply_symmetry_inverse(remainder_w, point.solitons[k - 1], point.eps));
    return out;
}

namespace {

std::vector<Eigen::VectorXd> compute_betas(const std::vector<TrajectoryFrame>& frames,
                                           const PotentialSpec& pot, double eps, int dim) {
    const std::size_t n = frames.size();
    const std::size_t k = frames[0].solitons.size();
    const int nb = block_size(dim);
    const double h = frames[1].t_unscaled - frames[0].t_unscaled;

    // Per-frame parameter derivative by finite differences on the unwrapped
    // series; second-order one-sided stencils at the ends keep rows complete.
    auto fd = [&](auto getter, std::size_t j, std::size_t f) {
        if (f == 0)
            return (-3.0 * getter(frames[0].solitons[j]) + 4.0 * getter(frames[1].solitons[j]) -
                    getter(frames[2].solitons[j])) /
                   (2.0 * h);
        if (f == n - 1)
            return (3.0 * getter(frames[n - 1].solitons[j]) -
                    4.0 * getter(frames[n - 2].solitons[j]) +
                    getter(frames[n - 3].solitons[j])) /
                   (2.0 * h);
        return (getter(frames[f + 1].solitons[j]) - getter(frames[f - 1].solitons[j])) / (2.0 * h);
    };

    std::vector<Eigen::VectorXd> betas(n);
    for (std::size_t f = 0; f < n; ++f) {
        Eigen::VectorXd b(static_cast<int>(k) * nb);
        for (std::size_t j = 0; j < k; ++j) {
            const SolitonParams& s = frames[f].solitons[j];
            double adotv = 0.0;
            double v2 = 0.0;
            auto gradv = potential_grad(pot, eps, s.a, dim);
            for (int m = 0; m < dim; ++m) {
                double adot = fd([m](const SolitonParams& q) { return q.a[m]; }, j, f);
                double vdot = fd([m](const SolitonParams& q) { return q.v[m]; }, j, f);
                b(static_cast<int>(j) * nb + m) = adot / (eps * eps) - s.v[m] / eps;
                b(static_cast<int>(j) * nb + dim + m) = 0.5 * vdot + eps * gradv[m];
                adotv += adot * s.v[m];
                v2 += s.v[m] * s.v[m];
            }
            double gdot = fd([](const SolitonParams& q) { return q.gamma; }, j, f);
            double mdot = fd([](const SolitonParams& q) { return q.mu; }, j, f);
            b(static_cast<int>(j) * nb + 2 * dim) = gdot - adotv / (2.0 * eps) - s.mu +
                                                    0.25 * v2 +
                                                    potential_value(pot, eps, s.a, dim);
            b(static_cast<int>(j) * nb + 2 * dim + 1) = mdot;
        }
        betas[f] = std::move(b);
    }
    return betas;
}

} // namespace

BetaSeries beta_from_trajectory(const std::vector<TrajectoryFrame>& frames,
                                const PotentialSpec& pot, double eps, int dim) {
    if (frames.size() < 3) throw DomainError("beta_from_trajectory needs at least 3 frames");
    BetaSeries series;
    series.beta = compute_betas(frames, pot, eps, dim);

    // Stride-doubled self-comparison gauges the difference error: when the
    // coefficients recomputed on every second frame disagree at the scale of
    // the coefficients themselves, the cadence is too coarse to trust them.
    if (frames.size() >= 7) {
        std::vector<TrajectoryFrame> coarse;
        for (std::size_t i = 0; i < frames.size(); i += 2) coarse.push_back(frames[i]);
        auto beta2 = compute_betas(coarse, pot, eps, dim);
        double max_beta = 0.0, max_err = 0.0;
        for (std::size_t i = 1; i + 1 < coarse.size(); ++i) {
            if (2 * i + 1 >= frames.size()) break;
            max_beta = std::max(max_beta, series.beta[2 * i].lpNorm<Eigen::Infinity>());
            max_err = std::max(max_err,
                               (series.beta[2 * i] - beta2[i]).lpNorm<Eigen::Infinity>());
        }
        // roundoff floor: differencing O(P) parameters leaves noise of order
        // macheps P / (h eps^2), which must not trip the warning
        double pscale = 0.0;
        for (const auto& f : frames)
            for (const auto& s : f.solitons) {
                for (int m = 0; m < dim; ++m)
                    pscale = std::max({pscale, std::abs(s.a[m]), std::abs(s.v[m])});
                pscale = std::max({pscale, std::abs(s.gamma), std::abs(s.mu)});
            }
        double h = frames[1].t_unscaled - frames[0].t_unscaled;
        double floor = 1e-13 * pscale / (h * eps * eps) + 1e-300;
        series.resolution_warning = max_err > std::max(max_beta, floor);
    }
    return series;
}

Eigen::MatrixXd full_omega(const ManifoldPoint& point, const GroundStateProfile& base,
                           const Grid& g) {
    const int nb = block_size(g.dim());
    const int total = static_cast<int>(point.k()) * nb;
    std::vector<std::vector<Field>> bases(point.k());
    for (std::size_t j = 0; j < point.k(); ++j) bases[j] = tangent_basis(point, j, base, g);

    Eigen::MatrixXd omega(total, total);
    for (std::size_t i = 0; i < point.k(); ++i)
        for (int n = 0; n < nb; ++n)
            for (std::size_t j = 0; j < point.k(); ++j)
                for (int m = 0; m < nb; ++m)
                    omega(static_cast<int>(i) * nb + n, static_cast<int>(j) * nb + m) =
                        pairing(bases[i][n], bases[j][m], point.eps, PairingKind::symplectic);
    return omega;
}

Eigen::VectorXd correction_terms(const Decomposition& dec, const TruncationSet& cuts,
                                 const PotentialSpec& pot, const Eigen::VectorXd& beta,
                                 const GroundStateProfile& base) {
    const Grid& g = dec.w.grid();
    const ManifoldPoint& point = dec.point;
    const int dim = g.dim();
    const int nb = block_size(dim);
    const std::size_t k = point.k();
    const double eps = point.eps;
    const NonlinearitySpec& nl = base.nonlinearity();

    PeakDecomposition peaks = truncate_peaks(dec.w + sum_solitons(point, base, g), dec, cuts, base);

    // Source field S = sum_l ( T_l N_{eta_l}(w_l) + R_l T_l(eta_l + w_l) ).
    Field source(g);
    std::vector<Field> transformed_w;
    transformed_w.reserve(k);
    for (std::size_t l = 0; l < k; ++l) {
        const SolitonParams& s = point.solitons[l];
        GroundStateProfile prof = base.with_parameters(s.mu, eps);
        Field eta = prof.sample(g); // centered at the origin, soliton frame
        Field nterm(g);
        const Field& wl = peaks.w[l];
        for (std::size_t i = 0; i < g.size(); ++i) {
            double ev = eta[i].real();
            double fp = nl.lambda * nl.pm1_pow(ev);
            Complex lin(nl.p * fp * wl[i].real(), fp * wl[i].imag());
            nterm[i] = nl.f(Complex(ev, 0.0) + wl[i]) - nl.f(Complex(ev, 0.0)) - lin;
        }
        source += apply_symmetry(nterm, s, eps);

        Field carried = apply_symmetry(eta + wl, s, eps);
        double va = potential_value(pot, eps, s.a, dim);
        auto gv = potential_grad(pot, eps, s.a, dim);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto x = g.point(i);
            double r = potential_value(pot, eps, x, dim) - va;
            for (int a = 0; a < dim; ++a) r -= gv[a] * (x[a] - s.a[a]);
            source[i] += r * carried[i];
        }
        transformed_w.push_back(apply_symmetry(wl, s, eps));
    }

    Eigen::VectorXd rhs(static_cast<int>(k) * nb);
    for (std::size_t i = 0; i < k; ++i) {
        auto zi = tangent_basis(point, i, base, g);
        for (int n = 0; n < nb; ++n) {
            double val = pairing(zi[n], source, eps, PairingKind::inner);
            // beta-weighted generator terms: J = multiplication by -i;
            // K_{l,m} w_l for m <= 2N+1 per the generator formulas, and the
            // scaling generator contributes nothing for an extracted w.
            Field jz = zi[n] * Complex(0.0, -1.0);
            for (std::size_t l = 0; l < k; ++l) {
                const SolitonParams& s = point.solitons[l];
                const Field& twl = transformed_w[l];
                for (int m = 0; m < dim; ++m) {
                    Field kw = apply_symmetry(spectral_derivative(peaks.w[l], m, 1), s, eps);
                    kw *= -eps;
                    val -= beta(static_cast<int>(l) * nb + m) *
                           pairing(jz, kw, eps, PairingKind::inner);
                }
                for (int m = 0; m < dim; ++m) {
                    Field kw(g);
                    for (std::size_t q = 0; q < g.size(); ++q) {
                        auto x = g.point(q);
                        double d = g.wrap(x[m] - s.a[m]);
                        kw[q] = Complex(0.0, d / eps) * twl[q];
                    }
                    val -= beta(static_cast<int>(l) * nb + dim + m) *
                           pairing(jz, kw, eps, PairingKind::inner);
                }
                Field kw = twl * Complex(0.0, 1.0);
                val -= beta(static_cast<int>(l) * nb + 2 * dim) *
                       pairing(jz, kw, eps, PairingKind::inner);
            }
            rhs(static_cast<int>(i) * nb + n) = val;
        }
    }

    Eigen::MatrixXd omega = full_omega(point, base, g);
    return omega.partialPivLu().solve(rhs);
}

} // namespace nlslab
