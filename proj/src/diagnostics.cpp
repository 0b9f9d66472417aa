#include "nlslab/diagnostics.hpp"

#include <cmath>

namespace nlslab {

double energy_functional(const Field& u, double mu, double eps, const NonlinearitySpec& nl) {
    const Grid& g = u.grid();
    double grad2 = 0.0;
    std::vector<Complex> spec(g.size());
    fft_forward(g, u.data(), spec.data());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            double k = g.wavenumber(g.axis_index(i, a));
            k2 += k * k;
        }
        grad2 += k2 * std::norm(spec[i]);
    }
    double wN = std::pow(g.dx(), g.dim()) / std::pow(eps, g.dim());
    grad2 *= wN / static_cast<double>(g.size());

    double m2sum = 0.0, psum = 0.0;
    const double pw = 0.5 * (nl.p + 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double m2 = std::norm(u[i]);
        m2sum += m2;
        psum += pw == 2.0 ? m2 * m2 : std::pow(m2, pw);
    }
    m2sum *= wN;
    psum *= wN;
    return 0.5 * (eps * eps * grad2 + mu * m2sum) - nl.lambda / (nl.p + 1.0) * psum;
}

EnergyReport energy_gap(const Decomposition& dec, const TruncationSet& cuts,
                        const GroundStateProfile& base) {
    const Grid& g = dec.w.grid();
    const ManifoldPoint& point = dec.point;
    Field psi = dec.w + sum_solitons(point, base, g);
    PeakDecomposition peaks = truncate_peaks(psi, dec, cuts, base);

    EnergyReport report;
    report.per_soliton.reserve(point.k());
    for (std::size_t j = 0; j < point.k(); ++j) {
        const SolitonParams& s = point.solitons[j];
        GroundStateProfile prof = base.with_parameters(s.mu, point.eps);
        Field eta = prof.sample(g);
        SolitonEnergyRow row;
        row.e_u = energy_functional(peaks.u[j], s.mu, point.eps, base.nonlinearity());
        row.e_eta = energy_functional(eta, s.mu, point.eps, base.nonlinearity());
        row.gap = row.e_u - row.e_eta;
        Field lw = apply_linearized(prof, peaks.w[j]);
        row.coercivity = pairing(lw, peaks.w[j], point.eps, PairingKind::inner);
        row.w_h1 = h1_norm(peaks.w[j], point.eps);
        report.per_soliton.push_back(row);
    }
    return report;
}

Field skew_project(const GroundStateProfile& profile, const Field& w) {
    const Grid& g = w.grid();
    TangentFrame frame = tangent_generators(profile, g);
    const int n = static_cast<int>(frame.z.size());
    double eps = profile.eps();

    Eigen::MatrixXd omega = omega_matrix_from_basis(frame.z, eps);
    Eigen::VectorXd rhs(n);
    for (int m = 0; m < n; ++m) rhs(m) = pairing(w, frame.z[m], eps, PairingKind::symplectic);
    // w - sum c_m z_m skew-orthogonal: Omega^T c = rhs.
    Eigen::VectorXd c = omega.transpose().partialPivLu().solve(rhs);

    Field out = w;
    for (int m = 0; m < n; ++m) out -= frame.z[m] * Complex(c(m), 0.0);
    return out;
}

CoercivityResult coercivity_form(const GroundStateProfile& profile, const Field& w) {
    const Grid& g = w.grid();
    TangentFrame frame = tangent_generators(profile, g);
    double eps = profile.eps();

    double worst = 0.0;
    for (const auto& z : frame.z)
        worst = std::max(worst, std::abs(pairing(w, z, eps, PairingKind::symplectic)));

    CoercivityResult res;
    Field v = w;
    double scale = h1_norm(w, eps);
    if (worst > 1e-10 * std::max(scale, 1e-300)) {
        v = skew_project(profile, w);
        res.projected = true;
        res.projection_size = h1_norm(w - v, eps);
    }
    Field lv = apply_linearized(profile, v);
    res.value = pairing(lv, v, eps, PairingKind::inner);
    return res;
}

TaylorRemainders taylor_remainders(const GroundStateProfile& profile, const Field& w) {
    const Grid& g = w.grid();
    const NonlinearitySpec& nl = profile.nonlinearity();
    double eps = profile.eps();
    Field eta = profile.sample(g);

    // Nonlinear energy functional F(u) = 2 lambda/(p+1) int eps^{-N}
    // |u|^{p+1} dx, whose L2 gradient at a real profile is 2 f(eta).
    auto F = [&](const Field& u) {
        double acc = 0.0;
        const double pw = 0.5 * (nl.p + 1.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double m2 = std::norm(u[i]);
            acc += pw == 2.0 ? m2 * m2 : std::pow(m2, pw);
        }
        return 2.0 * nl.lambda / (nl.p + 1.0) * acc * std::pow(g.dx(), g.dim()) /
               std::pow(eps, g.dim());
    };

    Field fprime(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        fprime[i] = Complex(2.0 * nl.f(eta[i].real()), 0.0);

    TaylorRemainders out;
    double linear = pairing(fprime, w, eps, PairingKind::inner);
    out.r2 = F(eta + w) - F(eta) - linear;

    // <F''(eta) w, w> = 2 <f'(eta) w, w> with the real-linearized f'.
    Field fw(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double fp = nl.lambda * nl.pm1_pow(eta[i].real());
        fw[i] = Complex(nl.p * fp * w[i].real(), fp * w[i].imag());
    }
    out.r3 = out.r2 - pairing(fw, w, eps, PairingKind::inner);

    // Pointwise nonlinear remainder, measured in a dual norm against 32
    // low-wavenumber modes in both orientations plus the tangent frame.
    Field nw(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double ev = eta[i].real();
        double fp = nl.lambda * nl.pm1_pow(ev);
        Complex lin(nl.p * fp * w[i].real(), fp * w[i].imag());
        nw[i] = nl.f(Complex(ev, 0.0) + w[i]) - nl.f(Complex(ev, 0.0)) - lin;
    }

    double best = 0.0;
    auto probe = [&](const Field& b) {
        double nn = h1_norm(b, eps);
        if (nn > 1e-300)
            best = std::max(best, std::abs(pairing(nw, b, eps, PairingKind::inner)) / nn);
    };
    for (int s = -16; s < 16; ++s) {
        Field mode(g);
        double k = 2.0 * Grid::kPi * s / g.box_length();
        for (std::size_t i = 0; i < g.size(); ++i) {
            double x = g.point(i)[0];
            mode[i] = Complex(std::cos(k * x), std::sin(k * x));
        }
        probe(mode);
        probe(mode * Complex(0.0, 1.0));
    }
    TangentFrame frame = tangent_generators(profile, g);
    for (const auto& z : frame.z) probe(z);
    out.n_norm = best;
    return out;
}

} // namespace nlslab
