#include "nlslab/particle.hpp"

#include <cmath>
#include <sstream>

namespace nlslab {

ParticleDerivatives ode_rhs(const ParticleState& state) {
    ParticleDerivatives d;
    d.dot.resize(state.bodies.size());
    for (std::size_t i = 0; i < state.bodies.size(); ++i) {
        const SolitonParams& b = state.bodies[i];
        auto gv = potential_grad(state.potential, state.eps, b.a, state.dim);
        double v2 = 0.0;
        for (int m = 0; m < state.dim; ++m) {
            d.dot[i].v[m] = -2.0 * gv[m];
            d.dot[i].a[m] = b.v[m];
            v2 += b.v[m] * b.v[m];
        }
        d.dot[i].gamma = (b.mu - potential_value(state.potential, state.eps, b.a, state.dim) +
                          state.phase_sign * 0.25 * v2) /
                         state.eps;
        d.dot[i].mu = 0.0;
    }
    return d;
}

double particle_invariant(const ParticleState& state, std::size_t body) {
    const SolitonParams& b = state.bodies[body];
    double v2 = 0.0;
    for (int m = 0; m < state.dim; ++m) v2 += b.v[m] * b.v[m];
    return 0.25 * v2 + potential_value(state.potential, state.eps, b.a, state.dim);
}

namespace {

void axpy(std::vector<SolitonParams>& y, double c, const std::vector<SolitonParams>& x, int dim) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (int m = 0; m < dim; ++m) {
            y[i].a[m] += c * x[i].a[m];
            y[i].v[m] += c * x[i].v[m];
        }
        y[i].gamma += c * x[i].gamma;
        y[i].mu += c * x[i].mu;
    }
}

} // namespace

std::vector<SolitonParams> ParticleSeries::at_time(double t_scaled) const {
    if (t.empty()) throw DomainError("empty particle series");
    double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
    auto idx = static_cast<std::size_t>(std::llround((t_scaled - t.front()) / dt));
    if (idx >= t.size()) idx = t.size() - 1;
    return s[idx];
}

ParticleSeries integrate(const ParticleState& initial, double t_end, double dt) {
    if (!(dt > 0.0)) throw DomainError("integrate requires dt > 0");
    const int dim = initial.dim;
    double span = t_end - initial.t_scaled;
    double step = span >= 0 ? dt : -dt;
    long nsteps = static_cast<long>(std::llround(std::abs(span) / dt));

    ParticleSeries series;
    series.t.reserve(nsteps + 1);
    series.s.reserve(nsteps + 1);

    ParticleState cur = initial;
    series.t.push_back(cur.t_scaled);
    series.s.push_back(cur.bodies);

    std::vector<double> inv0(cur.bodies.size());
    for (std::size_t i = 0; i < cur.bodies.size(); ++i) inv0[i] = particle_invariant(cur, i);

    for (long n = 0; n < nsteps; ++n) {
        std::vector<double> inv_before(cur.bodies.size());
        for (std::size_t i = 0; i < cur.bodies.size(); ++i)
            inv_before[i] = particle_invariant(cur, i);

        ParticleState k = cur;
        auto d1 = ode_rhs(k);
        k = cur;
        axpy(k.bodies, 0.5 * step, d1.dot, dim);
        k.t_scaled = cur.t_scaled + 0.5 * step;
        auto d2 = ode_rhs(k);
        k = cur;
        axpy(k.bodies, 0.5 * step, d2.dot, dim);
        k.t_scaled = cur.t_scaled + 0.5 * step;
        auto d3 = ode_rhs(k);
        k = cur;
        axpy(k.bodies, step, d3.dot, dim);
        k.t_scaled = cur.t_scaled + step;
        auto d4 = ode_rhs(k);

        axpy(cur.bodies, step / 6.0, d1.dot, dim);
        axpy(cur.bodies, step / 3.0, d2.dot, dim);
        axpy(cur.bodies, step / 3.0, d3.dot, dim);
        axpy(cur.bodies, step / 6.0, d4.dot, dim);
        cur.t_scaled += step;

        for (std::size_t i = 0; i < cur.bodies.size(); ++i) {
            double inv = particle_invariant(cur, i);
            double rel = std::abs(inv - inv_before[i]) / (std::abs(inv_before[i]) + 1.0);
            if (rel > 1e-8) {
                std::ostringstream os;
                os << "step rejected at t' = " << cur.t_scaled << ": invariant drift " << rel;
                throw IntegratorError(os.str());
            }
            series.max_invariant_drift =
                std::max(series.max_invariant_drift,
                         std::abs(inv - inv0[i]) / (std::abs(inv0[i]) + 1.0));
        }

        series.t.push_back(cur.t_scaled);
        series.s.push_back(cur.bodies);
    }

    // Integral-form reconstruction by the cumulative trapezoid rule over the
    // stored series, checked against the stepped values.
    const std::size_t nb = initial.bodies.size();
    std::vector<SolitonParams> acc = series.s.front();
    std::vector<SolitonParams> rates_prev(nb), rates_cur(nb);
    auto rates = [&](std::size_t frame, std::vector<SolitonParams>& out) {
        ParticleState st = initial;
        st.bodies = series.s[frame];
        st.t_scaled = series.t[frame];
        auto d = ode_rhs(st);
        out = d.dot;
    };
    rates(0, rates_prev);
    for (std::size_t f = 1; f < series.t.size(); ++f) {
        rates(f, rates_cur);
        double hdt = series.t[f] - series.t[f - 1];
        for (std::size_t i = 0; i < nb; ++i) {
            for (int m = 0; m < dim; ++m) {
                acc[i].v[m] += 0.5 * hdt * (rates_prev[i].v[m] + rates_cur[i].v[m]);
                acc[i].a[m] += 0.5 * hdt * (rates_prev[i].a[m] + rates_cur[i].a[m]);
            }
            acc[i].gamma += 0.5 * hdt * (rates_prev[i].gamma + rates_cur[i].gamma);
            for (int m = 0; m < dim; ++m) {
                series.integral_residual_v = std::max(
                    series.integral_residual_v, std::abs(acc[i].v[m] - series.s[f][i].v[m]));
                series.integral_residual_a = std::max(
                    series.integral_residual_a, std::abs(acc[i].a[m] - series.s[f][i].a[m]));
            }
            series.integral_residual_gamma = std::max(
                series.integral_residual_gamma, std::abs(acc[i].gamma - series.s[f][i].gamma));
        }
        rates_prev = rates_cur;
    }
    return series;
}

} // namespace nlslab
