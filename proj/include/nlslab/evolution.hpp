#pragma once

#include <array>
#include <string>
#include <vector>

#include "nlslab/ground_state.hpp"
#include "nlslab/soliton.hpp"

namespace nlslab {

enum class PotentialFamily { zero, quadratic, cosine, gaussian_well };

/// Slowly varying external potential V_eps(x) = V(eps_v x) with
/// eps_v = eps^h, h > 2. Families (in the slow variable y):
///   quadratic:     V(y) = amplitude/2 |y|^2
///   cosine:        V(y) = amplitude * sum_i cos(y_i)
///   gaussian_well: V(y) = -amplitude * exp(-|y|^2)
struct PotentialSpec {
    PotentialFamily family = PotentialFamily::zero;
    double amplitude = 1.0;
    double h = 2.5;

    PotentialSpec() = default;
    PotentialSpec(PotentialFamily f, double amp, double h_);
};

double eps_v(const PotentialSpec& spec, double eps);

double potential_value(const PotentialSpec& spec, double eps, const std::array<double, 2>& x,
                       int dim);
std::array<double, 2> potential_grad(const PotentialSpec& spec, double eps,
                                     const std::array<double, 2>& x, int dim);

/// V_eps and its analytic gradient sampled on the grid.
struct SampledPotential {
    std::vector<double> v;
    std::array<std::vector<double>, 2> grad;
};
SampledPotential build_potential(const PotentialSpec& spec, double eps, const Grid& g);

/// Largest sampled |d^a V_eps| / eps_v^|a| for |a| = 0, 1, 2 (the potential
/// regularity constants, used by configuration validation).
std::array<double, 3> potential_constants(const PotentialSpec& spec, double eps, const Grid& g);

struct EvolutionState {
    Field psi;
    double t = 0.0; // unscaled time
    double eps = 1.0;
};

struct ObservableRow {
    double t;
    double mass;
    double energy;
    std::array<double, 2> momentum;
};

/// Strang-split integrator for i dpsi/dt = -eps^2 Lap psi + V_eps psi - f(psi)
/// in unscaled time: half kinetic step exp(+i dt/2 eps^2 Lap) as a Fourier
/// multiplier, exact pointwise phase step exp(-i dt (V_eps - lambda
/// |psi|^{p-1})), half kinetic step. Both substeps preserve |psi| pointwise
/// in their own variable, so the discrete mass is conserved to roundoff.
class Evolver {
public:
    Evolver(const Grid& g, double eps, const NonlinearitySpec& nl, const PotentialSpec& pot);

    /// One Strang step; throws BlowUpError on non-finite values.
    void step(EvolutionState& state, double dt) const;

    /// Repeated steps to t_end; appends (t, mass, energy, momentum) every
    /// observer_stride steps (and at both endpoints). Aborts with
    /// BlowUpError if max|psi| exceeds 10x its initial value.
    std::vector<ObservableRow> evolve(EvolutionState& state, double t_end, double dt,
                                      int observer_stride) const;

    double mass(const Field& psi) const;
    double energy(const Field& psi) const;
    double momentum(const Field& psi, int axis) const;
    ObservableRow observe(const EvolutionState& state) const;

    const SampledPotential& potential() const { return pot_samples_; }
    const Grid& grid() const { return grid_; }

private:
    void ensure_multiplier(double dt) const;

    Grid grid_;
    double eps_;
    NonlinearitySpec nl_;
    PotentialSpec pot_;
    SampledPotential pot_samples_;

    mutable double cached_dt_ = -1.0;
    mutable std::vector<Complex> half_kinetic_;
    mutable std::vector<Complex> scratch_;
};

/// Default step per the accuracy budget: min(0.5 dx^2 / eps^2, 1e-3).
double default_dt(const Grid& g, double eps);

} // namespace nlslab
