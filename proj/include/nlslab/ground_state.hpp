#pragma once

#include <array>
#include <memory>
#include <vector>

#include "nlslab/grid.hpp"

namespace nlslab {

/// Power nonlinearity f(s) = lambda |s|^{p-1} s in the mass-subcritical
/// range 1 < p < 1 + 4/dim.
struct NonlinearitySpec {
    double p;
    double lambda;
    int dim;

    NonlinearitySpec(double p_, double lambda_, int dim_);

    double f(double s) const;
    Complex f(Complex s) const;
    /// d/ds of f on the reals at s > 0: lambda * p * s^{p-1}.
    double fprime(double s) const;
    /// |s|^{p-1} for real s >= 0.
    double pm1_pow(double s) const;
};

/// Exponent of the mass scaling m(mu) ~ mu^{2/(p-1) - N/2}; positive in the
/// subcritical range, zero at p = 1 + 4/N.
double mass_scaling_exponent(double p, int dim);

/// Admissible eigenvalue interval I = (inf, sup).
struct MuInterval {
    double inf = 0.5;
    double sup = 2.0;
    bool contains(double mu) const { return mu > inf && mu < sup; }
};

namespace detail {
struct BaseProfile;
}

/// Radial ground state eta_{mu,eps} of -eps^2 Lap u + mu u = f(u), carried
/// as a scaling of the base solution at mu = eps = 1:
///   eta_{mu,eps}(r) = mu^{1/(p-1)} eta_{1,1}(sqrt(mu) r / eps).
/// In 1D the base is closed form; in 2D it is a spectral renormalization
/// fixed point evaluated through its axis Fourier series.
class GroundStateProfile {
public:
    double mu() const { return mu_; }
    double eps() const { return eps_; }
    int dim() const;
    const NonlinearitySpec& nonlinearity() const;

    /// Tail rate of the base profile against r (1.0 for the 1D closed form).
    double alpha() const;
    /// int eta_{1,1}^2 dy over R^N.
    double base_l2() const;

    double base_value(double r) const;
    double base_deriv(double r) const;

    double value(double r) const;
    double radial_deriv(double r) const;
    /// d/dmu of eta_{mu,eps} at fixed r (analytic through the scaling family).
    double mu_deriv(double r) const;

    /// eta_{mu,eps}(x - center) sampled on the grid (real positive field).
    Field sample(const Grid& g, const std::array<double, 2>& center = {0.0, 0.0}) const;
    Field sample_mu_deriv(const Grid& g, const std::array<double, 2>& center = {0.0, 0.0}) const;

    /// Uniform radial samples of the base profile (serialization payload).
    const std::vector<double>& base_samples() const;
    double base_sample_dr() const;

    GroundStateProfile with_parameters(double mu, double eps) const;

    // Internal: constructed by solve_base_profile / deserialization.
    GroundStateProfile(std::shared_ptr<const detail::BaseProfile> base, double mu, double eps);

    const detail::BaseProfile& base() const { return *base_; }

private:
    std::shared_ptr<const detail::BaseProfile> base_;
    double mu_;
    double eps_;
};

/// Solve the base problem at mu = eps = 1. 1D: closed form
/// ((p+1)/(2 lambda))^{1/(p-1)} sech^{2/(p-1)}((p-1) x / 2); 2D: Petviashvili
/// iteration with fixed-point factor tolerance 1e-12.
GroundStateProfile solve_base_profile(const NonlinearitySpec& nl, int dim);

/// Scaling-family member at (mu, eps); mu must lie in the interval.
GroundStateProfile rescale(const GroundStateProfile& profile, double mu, double eps,
                           const MuInterval& box = MuInterval{});

/// (m(mu), m'(mu)) with m(mu) = 1/2 int eps^{-N} eta_{mu,eps}^2 dx, both
/// analytic through the scaling family (eps-independent).
std::pair<double, double> mass_and_derivative(const GroundStateProfile& profile, double mu);

struct DecayEstimate {
    double rate = 0.0;         // slope of -log eta against |x|/eps
    bool window_shrunk = false;
};

/// Least-squares tail fit over [3, 8] decay lengths; approx sqrt(mu).
DecayEstimate decay_rate(const GroundStateProfile& profile);

/// Tangent frame at sigma = (0, 0, 0, mu): z fields ordered
/// (z_t[0..N-1], z_b[0..N-1], z_g, z_s) = (-eps grad eta, (i x / eps) eta,
/// i eta, d_mu eta).
struct TangentFrame {
    std::vector<Field> z;
    int dim = 1;

    const Field& z_t(int axis) const { return z[axis]; }
    const Field& z_b(int axis) const { return z[dim + axis]; }
    const Field& z_g() const { return z[2 * dim]; }
    const Field& z_s() const { return z[2 * dim + 1]; }
};

TangentFrame tangent_generators(const GroundStateProfile& profile, const Grid& g);

/// Linearized operator at the (real, positive) profile:
///   L w = -eps^2 Lap w + mu w - lambda eta^{p-1} (p Re w + i Im w),
/// the standard real-linearization of |s|^{p-1} s at eta.
Field apply_linearized(const GroundStateProfile& profile, const Field& w);

/// || -eps^2 Lap eta + mu eta - f(eta) ||_L2 / ||eta||_L2 with the profile
/// sampled at the grid center and the spectral Laplacian.
double relative_residual(const GroundStateProfile& profile, const Grid& g);

} // namespace nlslab
