#include "nlslab/evolution.hpp"

#include <cmath>
#include <sstream>

namespace nlslab {

PotentialSpec::PotentialSpec(PotentialFamily f, double amp, double h_)
    : family(f), amplitude(amp), h(h_) {
    if (!(h > 2.0)) throw ConfigError("assumption (A): potential scale exponent h must be > 2");
}

double eps_v(const PotentialSpec& spec, double eps) { return std::pow(eps, spec.h); }

double potential_value(const PotentialSpec& spec, double eps, const std::array<double, 2>& x,
                       int dim) {
    double ev = eps_v(spec, eps);
    switch (spec.family) {
        case PotentialFamily::zero:
            return 0.0;
        case PotentialFamily::quadratic: {
            double r2 = 0.0;
            for (int a = 0; a < dim; ++a) r2 += (ev * x[a]) * (ev * x[a]);
            return 0.5 * spec.amplitude * r2;
        }
        case PotentialFamily::cosine: {
            double s = 0.0;
            for (int a = 0; a < dim; ++a) s += std::cos(ev * x[a]);
            return spec.amplitude * s;
        }
        case PotentialFamily::gaussian_well: {
            double r2 = 0.0;
            for (int a = 0; a < dim; ++a) r2 += (ev * x[a]) * (ev * x[a]);
            return -spec.amplitude * std::exp(-r2);
        }
    }
    throw ConfigError("unknown potential family");
}

std::array<double, 2> potential_grad(const PotentialSpec& spec, double eps,
                                     const std::array<double, 2>& x, int dim) {
    double ev = eps_v(spec, eps);
    std::array<double, 2> g{0.0, 0.0};
    switch (spec.family) {
        case PotentialFamily::zero:
            return g;
        case PotentialFamily::quadratic:
            for (int a = 0; a < dim; ++a) g[a] = spec.amplitude * ev * ev * x[a];
            return g;
        case PotentialFamily::cosine:
            for (int a = 0; a < dim; ++a) g[a] = -spec.amplitude * ev * std::sin(ev * x[a]);
            return g;
        case PotentialFamily::gaussian_well: {
            double r2 = 0.0;
            for (int a = 0; a < dim; ++a) r2 += (ev * x[a]) * (ev * x[a]);
            double e = std::exp(-r2);
            for (int a = 0; a < dim; ++a) g[a] = 2.0 * spec.amplitude * ev * ev * x[a] * e;
            return g;
        }
    }
    throw ConfigError("unknown potential family");
}

SampledPotential build_potential(const PotentialSpec& spec, double eps, const Grid& g) {
    SampledPotential out;
    out.v.resize(g.size());
    for (int a = 0; a < g.dim(); ++a) out.grad[a].resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto x = g.point(i);
        out.v[i] = potential_value(spec, eps, x, g.dim());
        auto gr = potential_grad(spec, eps, x, g.dim());
        for (int a = 0; a < g.dim(); ++a) out.grad[a][i] = gr[a];
    }
    return out;
}

std::array<double, 3> potential_constants(const PotentialSpec& spec, double eps, const Grid& g) {
    double ev = eps_v(spec, eps);
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    const int probes = 64;
    double fd = 1e-3 * g.box_length();
    for (int i = 0; i < probes; ++i) {
        std::array<double, 2> x{g.coord(i * g.points_per_axis() / probes), 0.0};
        if (g.dim() == 2) x[1] = g.coord(((i * 7) % probes) * g.points_per_axis() / probes);
        c0 = std::max(c0, std::abs(potential_value(spec, eps, x, g.dim())));
        auto gr = potential_grad(spec, eps, x, g.dim());
        for (int a = 0; a < g.dim(); ++a) c1 = std::max(c1, std::abs(gr[a]));
        // second derivative by centered differences of the analytic gradient
        for (int a = 0; a < g.dim(); ++a) {
            auto xp = x, xm = x;
            xp[a] += fd;
            xm[a] -= fd;
            double d2 = (potential_grad(spec, eps, xp, g.dim())[a] -
                         potential_grad(spec, eps, xm, g.dim())[a]) /
                        (2.0 * fd);
            c2 = std::max(c2, std::abs(d2));
        }
    }
    return {c0, c1 / ev, c2 / (ev * ev)};
}

Evolver::Evolver(const Grid& g, double eps, const NonlinearitySpec& nl, const PotentialSpec& pot)
    : grid_(g), eps_(eps), nl_(nl), pot_(pot), pot_samples_(build_potential(pot, eps, g)) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]");
    scratch_.resize(g.size());
}

void Evolver::ensure_multiplier(double dt) const {
    if (dt == cached_dt_) return;
    half_kinetic_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        double k2 = 0.0;
        for (int a = 0; a < grid_.dim(); ++a) {
            double k = grid_.wavenumber(grid_.axis_index(i, a));
            k2 += k * k;
        }
        double phase = -eps_ * eps_ * k2 * 0.5 * dt;
        half_kinetic_[i] = Complex(std::cos(phase), std::sin(phase));
    }
    cached_dt_ = dt;
}

void Evolver::step(EvolutionState& state, double dt) const {
    if (!(dt > 0.0)) throw DomainError("strang step requires dt > 0");
    ensure_multiplier(dt);
    Field& psi = state.psi;

    auto half_kinetic = [&]() {
        fft_forward(grid_, psi.data(), scratch_.data());
        for (std::size_t i = 0; i < grid_.size(); ++i) scratch_[i] *= half_kinetic_[i];
        fft_backward(grid_, scratch_.data(), psi.data());
        psi *= 1.0 / static_cast<double>(grid_.size());
    };

    half_kinetic();
    const double e = 0.5 * (nl_.p - 1.0);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        double m2 = std::norm(psi[i]);
        double amp;
        if (e == 1.0) amp = m2;
        else if (e == 0.5) amp = std::sqrt(m2);
        else amp = std::pow(m2, e);
        double theta = -dt * (pot_samples_.v[i] - nl_.lambda * amp);
        psi[i] *= Complex(std::cos(theta), std::sin(theta));
    }
    half_kinetic();

    state.t += dt;
    if (!all_finite(psi)) {
        std::ostringstream os;
        os << "non-finite field values at t = " << state.t;
        throw BlowUpError(os.str());
    }
}

double Evolver::mass(const Field& psi) const {
    return 0.5 * pairing(psi, psi, eps_, PairingKind::inner);
}

double Evolver::energy(const Field& psi) const {
    double kinetic = 0.0;
    fft_forward(grid_, psi.data(), scratch_.data());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        double k2 = 0.0;
        for (int a = 0; a < grid_.dim(); ++a) {
            double k = grid_.wavenumber(grid_.axis_index(i, a));
            k2 += k * k;
        }
        kinetic += k2 * std::norm(scratch_[i]);
    }
    double wN = std::pow(grid_.dx(), grid_.dim()) / std::pow(eps_, grid_.dim());
    kinetic *= eps_ * eps_ * wN / static_cast<double>(grid_.size());

    double pot = 0.0, nonlin = 0.0;
    const double pw = 0.5 * (nl_.p + 1.0);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        double m2 = std::norm(psi[i]);
        pot += pot_samples_.v[i] * m2;
        nonlin += pw == 2.0 ? m2 * m2 : std::pow(m2, pw);
    }
    pot *= wN;
    nonlin *= wN;
    return 0.5 * (kinetic + pot) - nl_.lambda / (nl_.p + 1.0) * nonlin;
}

double Evolver::momentum(const Field& psi, int axis) const {
    Field d = spectral_derivative(psi, axis, 1);
    d *= eps_;
    Field ipsi = psi * Complex(0.0, 1.0);
    return pairing(ipsi, d, eps_, PairingKind::inner);
}

ObservableRow Evolver::observe(const EvolutionState& state) const {
    ObservableRow row{};
    row.t = state.t;
    row.mass = mass(state.psi);
    row.energy = energy(state.psi);
    for (int a = 0; a < grid_.dim(); ++a) row.momentum[a] = momentum(state.psi, a);
    return row;
}

std::vector<ObservableRow> Evolver::evolve(EvolutionState& state, double t_end, double dt,
                                           int observer_stride) const {
    if (!(t_end > state.t)) throw DomainError("evolve requires t_end > current time");
    if (observer_stride < 1) observer_stride = 1;
    double baseline = max_abs(state.psi);
    std::vector<ObservableRow> record;
    record.push_back(observe(state));

    long steps = static_cast<long>(std::llround((t_end - state.t) / dt));
    if (steps < 1) steps = 1;
    for (long s = 1; s <= steps; ++s) {
        step(state, dt);
        if (s % observer_stride == 0 || s == steps) {
            double peak = max_abs(state.psi);
            if (peak > 10.0 * baseline) {
                std::ostringstream os;
                os << "amplitude grew 10x over its initial value at t = " << state.t;
                throw BlowUpError(os.str());
            }
            record.push_back(observe(state));
        }
    }
    return record;
}

double default_dt(const Grid& g, double eps) {
    return std::min(0.5 * g.dx() * g.dx() / (eps * eps), 1e-3);
}

} // namespace nlslab
