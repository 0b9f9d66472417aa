#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlslab/particle.hpp"

using namespace nlslab;

namespace {

ParticleState free_state(double eps, double v, double mu, int sign = +1) {
    ParticleState st;
    st.eps = eps;
    st.dim = 1;
    st.phase_sign = sign;
    st.potential = PotentialSpec(PotentialFamily::zero, 0.0, 2.5);
    st.bodies.push_back({{0.0, 0.0}, {v, 0.0}, 0.0, mu});
    return st;
}

} // namespace

TEST_CASE("free flight is exact") {
    ParticleState st = free_state(0.1, 0.3, 1.0);
    ParticleSeries series = integrate(st, 2.0, 1e-3);
    const auto& last = series.s.back()[0];
    CHECK(last.a[0] == doctest::Approx(0.3 * 2.0).epsilon(1e-12));
    CHECK(last.v[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(last.mu == 1.0);
    // gamma rate (mu - V + v^2/4) / eps, linear in time
    double expect = (1.0 + 0.25 * 0.09) / 0.1 * 2.0;
    CHECK(last.gamma == doctest::Approx(expect).epsilon(1e-12));

    ParticleState stm = free_state(0.1, 0.3, 1.0, -1);
    ParticleSeries sm = integrate(stm, 2.0, 1e-3);
    double expect_m = (1.0 - 0.25 * 0.09) / 0.1 * 2.0;
    CHECK(sm.s.back()[0].gamma == doctest::Approx(expect_m).epsilon(1e-12));
}

TEST_CASE("harmonic well matches the oscillator closed form") {
    double eps = 0.1;
    double kappa = 1.0;
    ParticleState st;
    st.eps = eps;
    st.dim = 1;
    st.potential = PotentialSpec(PotentialFamily::quadratic, kappa, 2.5);
    st.bodies.push_back({{2.0, 0.0}, {0.3, 0.0}, 0.0, 1.0});

    double ev = eps_v(st.potential, eps);
    double omega = std::sqrt(2.0 * kappa) * ev;

    double t_end = 1.0 / eps;
    ParticleSeries series = integrate(st, t_end, 1e-3);
    const auto& last = series.s.back()[0];
    double a_exact = 2.0 * std::cos(omega * t_end) + 0.3 / omega * std::sin(omega * t_end);
    double v_exact = 0.3 * std::cos(omega * t_end) - 2.0 * omega * std::sin(omega * t_end);
    CHECK(last.a[0] == doctest::Approx(a_exact).epsilon(1e-8));
    CHECK(last.v[0] == doctest::Approx(v_exact).epsilon(1e-8));
    CHECK(series.max_invariant_drift < 1e-10);
    CHECK(last.mu == 1.0);

    // integral reconstruction agrees with the stepped series
    CHECK(series.integral_residual_v < 1e-9);
    CHECK(series.integral_residual_a < 1e-9);
    CHECK(series.integral_residual_gamma < 1e-7);
}

TEST_CASE("fourth order self convergence") {
    ParticleState st;
    st.eps = 0.9;
    st.dim = 1;
    st.potential = PotentialSpec(PotentialFamily::quadratic, 2.0, 2.1);
    st.bodies.push_back({{1.0, 0.0}, {0.4, 0.0}, 0.0, 1.0});

    double ev = eps_v(st.potential, st.eps);
    double omega = std::sqrt(2.0 * 2.0) * ev;
    double t_end = 5.0;
    auto exact_a = 1.0 * std::cos(omega * t_end) + 0.4 / omega * std::sin(omega * t_end);

    auto err = [&](double dt) {
        ParticleSeries s = integrate(st, t_end, dt);
        return std::abs(s.s.back()[0].a[0] - exact_a);
    };
    double e1 = err(0.05), e2 = err(0.025);
    double order = std::log2(e1 / e2);
    CHECK(order > 3.4);
    CHECK(order < 4.6);
}

TEST_CASE("time reversal returns the initial state") {
    ParticleState st;
    st.eps = 0.2;
    st.dim = 1;
    st.potential = PotentialSpec(PotentialFamily::gaussian_well, 1.0, 2.5);
    st.bodies.push_back({{1.5, 0.0}, {0.25, 0.0}, 0.4, 1.2});

    ParticleSeries fwd = integrate(st, 3.0, 1e-3);
    ParticleState mid = st;
    mid.bodies = fwd.s.back();
    mid.t_scaled = 3.0;
    ParticleSeries bwd = integrate(mid, 0.0, 1e-3);
    const auto& back = bwd.s.back()[0];
    CHECK(std::abs(back.a[0] - st.bodies[0].a[0]) < 1e-9);
    CHECK(std::abs(back.v[0] - st.bodies[0].v[0]) < 1e-9);
    CHECK(std::abs(back.gamma - st.bodies[0].gamma) < 1e-9);
    CHECK(std::abs(back.mu - st.bodies[0].mu) < 1e-15);
}

TEST_CASE("giant steps are rejected") {
    ParticleState st;
    st.eps = 0.9;
    st.dim = 1;
    st.potential = PotentialSpec(PotentialFamily::quadratic, 2.0, 2.1);
    st.bodies.push_back({{1.0, 0.0}, {0.4, 0.0}, 0.0, 1.0});
    CHECK_THROWS_AS(integrate(st, 40.0, 2.0), IntegratorError);
}

TEST_CASE("two body bookkeeping stays independent without forces") {
    ParticleState st;
    st.eps = 0.1;
    st.dim = 1;
    st.potential = PotentialSpec(PotentialFamily::zero, 0.0, 2.5);
    st.bodies.push_back({{-5.0, 0.0}, {0.2, 0.0}, 0.0, 0.9});
    st.bodies.push_back({{5.0, 0.0}, {-0.1, 0.0}, 1.0, 1.3});
    ParticleSeries series = integrate(st, 4.0, 1e-3);
    CHECK(series.s.back()[0].a[0] == doctest::Approx(-5.0 + 0.8).epsilon(1e-11));
    CHECK(series.s.back()[1].a[0] == doctest::Approx(5.0 - 0.4).epsilon(1e-11));
}
