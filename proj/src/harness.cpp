#include "nlslab/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <future>
#include <random>
#include <sstream>

#include "nlslab/io.hpp"

namespace nlslab {

using nlohmann::json;

const char* const kCodeVersion = "0.1.0";

namespace {

PotentialFamily family_from_string(const std::string& s) {
    if (s == "zero") return PotentialFamily::zero;
    if (s == "quadratic") return PotentialFamily::quadratic;
    if (s == "cosine") return PotentialFamily::cosine;
    if (s == "gaussian_well") return PotentialFamily::gaussian_well;
    throw ConfigError("unknown potential family \"" + s + "\"");
}

std::string family_to_string(PotentialFamily f) {
    switch (f) {
        case PotentialFamily::zero: return "zero";
        case PotentialFamily::quadratic: return "quadratic";
        case PotentialFamily::cosine: return "cosine";
        case PotentialFamily::gaussian_well: return "gaussian_well";
    }
    return "zero";
}

double norm2(const std::array<double, 2>& x, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += x[a] * x[a];
    return std::sqrt(s);
}

double mod_2pi(double g) {
    double twopi = 2.0 * Grid::kPi;
    double r = std::fmod(g, twopi);
    if (r < 0) r += twopi;
    return r;
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    require_known_keys(j,
                       {"grid", "eps", "nonlinearity", "potential", "solitons", "perturbation",
                        "box_constants", "time", "phase_sign", "out_dir"},
                       "config");
    ExperimentConfig cfg;
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        require_known_keys(g, {"dim", "points", "box"}, "config.grid");
        if (g.contains("dim")) cfg.dim = g.at("dim").get<int>();
        if (g.contains("points")) cfg.points = g.at("points").get<int>();
        if (g.contains("box")) cfg.box = g.at("box").get<double>();
    }
    cfg.eps = j.at("eps").get<double>();
    if (j.contains("nonlinearity")) {
        const auto& n = j.at("nonlinearity");
        require_known_keys(n, {"p", "lambda"}, "config.nonlinearity");
        if (n.contains("p")) cfg.p = n.at("p").get<double>();
        if (n.contains("lambda")) cfg.lambda = n.at("lambda").get<double>();
    }
    if (j.contains("potential")) {
        const auto& p = j.at("potential");
        require_known_keys(p, {"family", "amplitude", "h"}, "config.potential");
        cfg.potential.family = family_from_string(p.value("family", "zero"));
        if (p.contains("amplitude")) cfg.potential.amplitude = p.at("amplitude").get<double>();
        if (p.contains("h")) cfg.potential.h = p.at("h").get<double>();
    }
    for (const auto& s : j.at("solitons")) {
        require_known_keys(s, {"a", "v", "gamma", "mu"}, "config.solitons[]");
        SolitonParams sp;
        auto av = s.at("a").get<std::vector<double>>();
        auto vv = s.at("v").get<std::vector<double>>();
        for (std::size_t i = 0; i < av.size() && i < 2; ++i) sp.a[i] = av[i];
        for (std::size_t i = 0; i < vv.size() && i < 2; ++i) sp.v[i] = vv[i];
        sp.gamma = s.value("gamma", 0.0);
        sp.mu = s.value("mu", 1.0);
        cfg.solitons.push_back(sp);
    }
    if (j.contains("perturbation")) {
        const auto& p = j.at("perturbation");
        require_known_keys(p, {"c", "offset", "width", "mode", "seed", "count"},
                           "config.perturbation");
        if (p.contains("c")) cfg.perturbation.c = p.at("c").get<double>();
        if (p.contains("offset")) cfg.perturbation.offset = p.at("offset").get<double>();
        if (p.contains("width")) cfg.perturbation.width = p.at("width").get<double>();
        if (p.contains("mode")) cfg.perturbation.mode = p.at("mode").get<std::string>();
        if (p.contains("seed")) cfg.perturbation.seed = p.at("seed").get<std::uint64_t>();
        if (p.contains("count")) cfg.perturbation.count = p.at("count").get<int>();
    }
    if (j.contains("box_constants")) {
        const auto& b = j.at("box_constants");
        require_known_keys(b, {"K", "L", "mu_inf", "mu_sup", "d"}, "config.box_constants");
        if (b.contains("K")) cfg.constants.K = b.at("K").get<double>();
        if (b.contains("L")) cfg.constants.L = b.at("L").get<double>();
        if (b.contains("mu_inf")) cfg.constants.mu.inf = b.at("mu_inf").get<double>();
        if (b.contains("mu_sup")) cfg.constants.mu.sup = b.at("mu_sup").get<double>();
        if (b.contains("d")) cfg.constants.d = b.at("d").get<double>();
    }
    if (j.contains("time")) {
        const auto& t = j.at("time");
        require_known_keys(t, {"t_end_scaled", "dt", "cadence_scaled", "ode_dt"}, "config.time");
        if (t.contains("t_end_scaled")) cfg.time.t_end_scaled = t.at("t_end_scaled").get<double>();
        if (t.contains("dt")) cfg.time.dt = t.at("dt").get<double>();
        if (t.contains("cadence_scaled"))
            cfg.time.cadence_scaled = t.at("cadence_scaled").get<double>();
        if (t.contains("ode_dt")) cfg.time.ode_dt = t.at("ode_dt").get<double>();
    }
    if (j.contains("phase_sign")) cfg.phase_sign = j.at("phase_sign").get<int>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["grid"] = {{"dim", cfg.dim}, {"points", cfg.points}, {"box", cfg.box}};
    j["eps"] = cfg.eps;
    j["nonlinearity"] = {{"p", cfg.p}, {"lambda", cfg.lambda}};
    j["potential"] = {{"family", family_to_string(cfg.potential.family)},
                      {"amplitude", cfg.potential.amplitude},
                      {"h", cfg.potential.h}};
    j["solitons"] = json::array();
    for (const auto& s : cfg.solitons) {
        std::vector<double> a(s.a.begin(), s.a.begin() + cfg.dim);
        std::vector<double> v(s.v.begin(), s.v.begin() + cfg.dim);
        j["solitons"].push_back({{"a", a}, {"v", v}, {"gamma", s.gamma}, {"mu", s.mu}});
    }
    j["perturbation"] = {{"c", cfg.perturbation.c},     {"offset", cfg.perturbation.offset},
                         {"width", cfg.perturbation.width}, {"mode", cfg.perturbation.mode},
                         {"seed", cfg.perturbation.seed},   {"count", cfg.perturbation.count}};
    j["box_constants"] = {{"K", cfg.constants.K},
                          {"L", cfg.constants.L},
                          {"mu_inf", cfg.constants.mu.inf},
                          {"mu_sup", cfg.constants.mu.sup},
                          {"d", cfg.constants.d}};
    j["time"] = {{"t_end_scaled", cfg.time.t_end_scaled},
                 {"dt", cfg.time.dt},
                 {"cadence_scaled", cfg.time.cadence_scaled},
                 {"ode_dt", cfg.time.ode_dt}};
    j["phase_sign"] = cfg.phase_sign;
    j["out_dir"] = cfg.out_dir;
    return j;
}

ExperimentConfig load_config_file(const std::string& path) {
    return config_from_json(json::parse(read_text_file(path)));
}

Grid make_grid(const ExperimentConfig& cfg) {
    if (cfg.box > 0.0) return Grid(cfg.dim, cfg.points, cfg.box);
    double span = 0.0;
    for (const auto& s : cfg.solitons) {
        double amax = 0.0, vmax = 0.0;
        for (int a = 0; a < cfg.dim; ++a) {
            amax = std::max(amax, std::abs(s.a[a]));
            vmax = std::max(vmax, std::abs(s.v[a]));
        }
        span = std::max(span, amax + vmax * cfg.time.t_end_scaled + 2.0);
        span = std::max(span, amax + 2.0 * cfg.constants.L + 2.0);
    }
    // 80 base decay lengths keep the wrap-around tails at the 1e-17 level.
    double box = std::max(2.0 * span + 80.0 * cfg.eps / std::sqrt(cfg.constants.mu.inf), 20.0);
    return Grid(cfg.dim, cfg.points, box);
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> warnings;
    if (!(cfg.eps > 0.0 && cfg.eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]");
    if (cfg.solitons.empty()) throw ConfigError("at least one soliton required");
    if (!(cfg.time.t_end_scaled > 0.0)) throw ConfigError("t_end_scaled must be positive");
    if (!(cfg.time.cadence_scaled > 0.0)) throw ConfigError("cadence_scaled must be positive");
    if (cfg.phase_sign != 1 && cfg.phase_sign != -1)
        throw ConfigError("phase_sign must be +1 or -1");
    if (!(cfg.perturbation.c >= 0.0)) throw ConfigError("perturbation amplitude must be >= 0");

    // (B) subcritical nonlinearity; throws with the assumption letter.
    NonlinearitySpec nl(cfg.p, cfg.lambda, cfg.dim);

    // (A) potential scale separation.
    if (!(cfg.potential.h > 2.0))
        throw ConfigError("assumption (A): potential scale exponent h must be > 2");
    Grid g = make_grid(cfg);
    auto consts = potential_constants(cfg.potential, cfg.eps, g);
    for (double c : consts)
        if (!std::isfinite(c) || c > 1e6)
            throw ConfigError("assumption (A): sampled potential regularity constant too large");

    // (C) initial data box constants.
    const auto& bc = cfg.constants;
    if (!(bc.K > 0.0) || !(bc.L > 0.0))
        throw ConfigError("assumption (C): K and L must be positive");
    if (!(bc.mu.inf > 0.0 && bc.mu.sup > bc.mu.inf))
        throw ConfigError("assumption (C): need 0 < mu_inf < mu_sup");
    for (std::size_t i = 0; i < cfg.solitons.size(); ++i) {
        const auto& s = cfg.solitons[i];
        if (!bc.mu.contains(s.mu)) {
            std::ostringstream os;
            os << "assumption (C): mu_" << i << " = " << s.mu << " outside (" << bc.mu.inf
               << ", " << bc.mu.sup << ")";
            throw ConfigError(os.str());
        }
        if (!(norm2(s.v, cfg.dim) < bc.K)) {
            std::ostringstream os;
            os << "assumption (C): |v_" << i << "| = " << norm2(s.v, cfg.dim)
               << " not below K = " << bc.K;
            throw ConfigError(os.str());
        }
        for (std::size_t l = 0; l < i; ++l) {
            std::array<double, 2> diff{s.a[0] - cfg.solitons[l].a[0],
                                       s.a[1] - cfg.solitons[l].a[1]};
            double dist = norm2(diff, cfg.dim);
            if (!(dist > 6.0 * bc.L)) {
                std::ostringstream os;
                os << "assumption (C): |a_" << i << " - a_" << l << "| = " << dist
                   << " not above 6L = " << 6.0 * bc.L;
                throw ConfigError(os.str());
            }
        }
    }

    // (D) clearance of the straight reference paths; violations only warn
    // (the base window still applies).
    if (bc.d > 0.0 && cfg.solitons.size() >= 2) {
        for (std::size_t i = 0; i < cfg.solitons.size(); ++i)
            for (std::size_t l = 0; l < i; ++l) {
                std::array<double, 2> da{}, dv{};
                for (int a = 0; a < cfg.dim; ++a) {
                    da[a] = cfg.solitons[i].a[a] - cfg.solitons[l].a[a];
                    dv[a] = cfg.solitons[i].v[a] - cfg.solitons[l].v[a];
                }
                double aa = 0, av = 0, vv = 0;
                for (int a = 0; a < cfg.dim; ++a) {
                    aa += da[a] * da[a];
                    av += da[a] * dv[a];
                    vv += dv[a] * dv[a];
                }
                double smin = vv > 0 ? std::max(0.0, -av / vv) : 0.0;
                double dist2 = aa + 2.0 * av * smin + vv * smin * smin;
                if (!(std::sqrt(dist2) > 2.0 * bc.d)) {
                    std::ostringstream os;
                    os << "assumption (D): reference paths of solitons " << l << " and " << i
                       << " approach within " << std::sqrt(dist2) << " <= 2d = " << 2.0 * bc.d;
                    warnings.push_back(os.str());
                }
            }
    }

    // Window discipline: horizons beyond L/K need the extension mechanism.
    double window = bc.L / bc.K;
    if (cfg.time.t_end_scaled > window && cfg.solitons.size() >= 2) {
        if (!(bc.d > 0.0))
            throw ConfigError(
                "window discipline: t_end_scaled exceeds L/K and no reference-path constant d "
                "was provided for the extension (assumption (D))");
    }
    (void)nl;
    return warnings;
}

Field build_initial_data(const ExperimentConfig& cfg, const GroundStateProfile& base,
                         const Grid& g) {
    validate_config(cfg);
    ManifoldPoint point{cfg.solitons, cfg.eps};
    Field psi = sum_solitons(point, base, g);
    if (cfg.perturbation.c <= 0.0) return psi;

    double width = cfg.perturbation.width > 0 ? cfg.perturbation.width : 3.0 * cfg.eps;
    Field bump(g);
    if (cfg.perturbation.mode == "bump") {
        std::array<double, 2> c = cfg.solitons[0].a;
        c[0] += cfg.perturbation.offset;
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto x = g.point(i);
            double r2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                double d = g.wrap(x[a] - c[a]);
                r2 += d * d;
            }
            bump[i] = std::exp(-0.5 * r2 / (width * width));
        }
    } else if (cfg.perturbation.mode == "multibump") {
        std::mt19937_64 rng(cfg.perturbation.seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (int b = 0; b < std::max(1, cfg.perturbation.count); ++b) {
            const auto& s = cfg.solitons[b % cfg.solitons.size()];
            std::array<double, 2> c = s.a;
            for (int a = 0; a < g.dim(); ++a) c[a] += 2.0 * cfg.constants.L * uni(rng);
            double phase = Grid::kPi * uni(rng);
            Complex amp(std::cos(phase), std::sin(phase));
            for (std::size_t i = 0; i < g.size(); ++i) {
                auto x = g.point(i);
                double r2 = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    double d = g.wrap(x[a] - c[a]);
                    r2 += d * d;
                }
                bump[i] += amp * std::exp(-0.5 * r2 / (width * width));
            }
        }
    } else {
        throw ConfigError("unknown perturbation mode \"" + cfg.perturbation.mode + "\"");
    }

    double nn = h1_norm(bump, cfg.eps);
    if (!(nn > 0.0)) throw ConfigError("degenerate perturbation envelope");
    bump *= cfg.perturbation.c * eps_v(cfg.potential, cfg.eps) / nn;
    psi += bump;
    return psi;
}

namespace {

struct FrameScalars {
    double t_unscaled = 0.0;
    double mass = 0.0, energy = 0.0, w_h1 = 0.0;
    std::vector<double> gap;
    double beta_inf = 0.0, x_delta = 0.0;
    std::vector<SolitonParams> sigma;
};

double sigma_component_shift(const ManifoldPoint& a, const std::vector<SolitonParams>& b,
                             int dim) {
    double worst = 0.0;
    for (std::size_t j = 0; j < a.solitons.size(); ++j) {
        for (int m = 0; m < dim; ++m) {
            worst = std::max(worst, std::abs(a.solitons[j].a[m] - b[j].a[m]));
            worst = std::max(worst, std::abs(a.solitons[j].v[m] - b[j].v[m]));
        }
        worst = std::max(worst, std::abs(a.solitons[j].gamma - b[j].gamma));
        worst = std::max(worst, std::abs(a.solitons[j].mu - b[j].mu));
    }
    return worst;
}

} // namespace

RunRecord run_compare(const ExperimentConfig& cfg) {
    auto t_start = std::chrono::steady_clock::now();
    validate_config(cfg);

    RunRecord rec;
    rec.dim = cfg.dim;
    rec.eps = cfg.eps;
    rec.eps_v = eps_v(cfg.potential, cfg.eps);
    rec.code_version = kCodeVersion;
    rec.config_hash = fnv1a64(config_to_json(cfg).dump());

    Grid grid = make_grid(cfg);
    NonlinearitySpec nl(cfg.p, cfg.lambda, cfg.dim);
    GroundStateProfile base = solve_base_profile(nl, cfg.dim);
    const double eps = cfg.eps;
    const std::size_t k = cfg.solitons.size();
    const int nb = 2 * cfg.dim + 2;

    Field psi0 = build_initial_data(cfg, base, grid);

    DecomposeOptions dopts;
    dopts.mu_box = cfg.constants.mu;

    ManifoldPoint guess{cfg.solitons, eps};
    Decomposition dec0 = decompose(psi0, guess, base, dopts);
    rec.sigma0_shift = sigma_component_shift(dec0.point, cfg.solitons, cfg.dim);
    double ev = rec.eps_v;
    rec.w0_over_eps_v = ev > 0 ? h1_norm(dec0.w, eps) / ev : 0.0;

    // Effective particle dynamics from the decomposed initial parameters.
    double cadence = cfg.time.cadence_scaled;
    long frames = std::llround(cfg.time.t_end_scaled / cadence);
    if (frames < 3) frames = 3;
    double ode_dt = cadence / std::max(1.0, std::ceil(cadence / cfg.time.ode_dt));
    ParticleState pstate{dec0.point.solitons, 0.0, eps, cfg.dim, cfg.potential, cfg.phase_sign};
    ParticleSeries ode = integrate(pstate, frames * cadence, ode_dt);

    Evolver evolver(grid, eps, nl, cfg.potential);
    EvolutionState state{psi0, 0.0, eps};

    double cadence_unscaled = cadence / eps;
    double dt0 = cfg.time.dt > 0 ? cfg.time.dt : default_dt(grid, eps);
    long steps_per_frame = std::max<long>(1, std::llround(cadence_unscaled / dt0));
    double dt = cadence_unscaled / static_cast<double>(steps_per_frame);

    TruncationSet cuts;
    cuts.inner_radius = cfg.constants.L;
    for (const auto& s : cfg.solitons) cuts.centers.push_back(s.a);

    // Tracking-window bookkeeping: the base window is L/K; when the
    // reference paths stay clear, crossing a window boundary re-validates
    // the separation constants at the current state and re-bases the chart.
    double window = cfg.constants.L / cfg.constants.K;
    double window_increment =
        k >= 2 && cfg.constants.d > 0 ? cfg.constants.d / (6.0 * cfg.constants.K) : window;
    double sep_required = k >= 2 && cfg.constants.d > 0 ? cfg.constants.d : 6.0 * cfg.constants.L;
    double next_boundary = window;
    std::vector<std::array<double, 2>> chart_bases;
    for (const auto& s : cfg.solitons) chart_bases.push_back(s.a);
    double chart_radius = cfg.constants.L;

    std::vector<FrameScalars> frame_data;
    std::vector<TrajectoryFrame> traj_frames;
    std::deque<std::pair<long, Decomposition>> recent; // sliding window of 3 decompositions

    const Decomposition dec_first = dec0;
    const TruncationSet cuts_initial = cuts;
    ManifoldPoint warm = dec0.point;
    double baseline_amp = max_abs(psi0);
    rec.status = "complete";

    auto observe_frame = [&](long f, const Decomposition& dec) {
        FrameScalars fs;
        fs.t_unscaled = state.t;
        fs.mass = evolver.mass(state.psi);
        fs.energy = evolver.energy(state.psi);
        fs.w_h1 = h1_norm(dec.w, eps);
        EnergyReport er = energy_gap(dec, cuts, base);
        for (const auto& row : er.per_soliton) fs.gap.push_back(row.gap);
        fs.sigma = dec.point.solitons;
        frame_data.push_back(std::move(fs));
        traj_frames.push_back(TrajectoryFrame{state.t, dec.point.solitons});
        recent.emplace_back(f, dec);
        while (recent.size() > 3) recent.pop_front();
    };

    // The beta of one frame needs its neighbors, so the correction vector of
    // frame f-1 is evaluated once frame f is decomposed (a three-frame window
    // reproduces the full-series difference stencils exactly).
    std::vector<bool> xdelta_done(frames + 2, false);
    auto local_beta = [&](std::size_t lo, int pick) {
        std::vector<TrajectoryFrame> wnd(traj_frames.begin() + lo,
                                         traj_frames.begin() + lo + 3);
        return beta_from_trajectory(wnd, cfg.potential, eps, cfg.dim).beta[pick];
    };
    auto eval_xdelta = [&](long fi, const Decomposition& dec, const Eigen::VectorXd& beta) {
        if (xdelta_done[fi]) return;
        Eigen::VectorXd x = correction_terms(dec, fi == 0 ? cuts_initial : cuts, cfg.potential,
                                             beta, base);
        frame_data[fi].x_delta = x.lpNorm<Eigen::Infinity>();
        xdelta_done[fi] = true;
    };

    observe_frame(0, dec0);

    long f = 1;
    try {
        for (; f <= frames; ++f) {
            for (long s = 0; s < steps_per_frame; ++s) evolver.step(state, dt);
            if (max_abs(state.psi) > 10.0 * baseline_amp)
                throw BlowUpError("amplitude grew 10x over its initial value");

            Decomposition dec = decompose(state.psi, warm, base, dopts);
            warm = dec.point;

            for (std::size_t j = 0; j < k; ++j) {
                std::array<double, 2> dj{dec.point.solitons[j].a[0] - chart_bases[j][0],
                                         dec.point.solitons[j].a[1] - chart_bases[j][1]};
                if (norm2(dj, cfg.dim) > chart_radius) rec.sigma_left_box = true;
            }

            double t_scaled = state.t * eps;
            if (t_scaled >= next_boundary - 1e-12 && f < frames) {
                // Re-validate the restart constants and re-base the chart.
                bool ok = true;
                for (std::size_t i = 0; i < k && ok; ++i) {
                    if (!cfg.constants.mu.contains(dec.point.solitons[i].mu)) ok = false;
                    if (!(norm2(dec.point.solitons[i].v, cfg.dim) < cfg.constants.K)) ok = false;
                    for (std::size_t l = 0; l < i && ok; ++l) {
                        std::array<double, 2> dd{
                            dec.point.solitons[i].a[0] - dec.point.solitons[l].a[0],
                            dec.point.solitons[i].a[1] - dec.point.solitons[l].a[1]};
                        if (!(norm2(dd, cfg.dim) > sep_required)) ok = false;
                    }
                }
                if (!ok) {
                    rec.status = "partial";
                    rec.exit_reason = "window extension re-validation failed at t' = " +
                                      format_double(t_scaled);
                    observe_frame(f, dec);
                    break;
                }
                ++rec.window_extensions;
                next_boundary += window_increment;
                for (std::size_t j = 0; j < k; ++j) {
                    chart_bases[j] = dec.point.solitons[j].a;
                    cuts.centers[j] = dec.point.solitons[j].a;
                }
                if (k >= 2 && cfg.constants.d > 0) chart_radius = cfg.constants.d / 6.0;
            }

            observe_frame(f, dec);
            if (frame_data.size() >= 3)
                eval_xdelta(static_cast<long>(frame_data.size()) - 2, recent[recent.size() - 2].second,
                            local_beta(frame_data.size() - 3, 1));
        }
    } catch (const DecompositionError& e) {
        rec.status = "partial";
        rec.exit_reason = e.what();
    } catch (const BlowUpError& e) {
        rec.status = "partial";
        rec.exit_reason = e.what();
    }

    const long got = static_cast<long>(frame_data.size());
    if (got >= 3) {
        BetaSeries betas = beta_from_trajectory(traj_frames, cfg.potential, eps, cfg.dim);
        rec.beta_resolution_warning = betas.resolution_warning;
        for (long i = 0; i < got; ++i)
            frame_data[i].beta_inf = betas.beta[i].lpNorm<Eigen::Infinity>();

        // Endpoint frames (and any trailing frames skipped by an early stop)
        // use the one-sided stencils.
        for (const auto& [fi, dec] : recent)
            if (fi < got) eval_xdelta(fi, dec, betas.beta[fi]);
        eval_xdelta(0, dec_first, betas.beta[0]);
    }

    // Rows and comparison against the particle system.
    for (long i = 0; i < got; ++i) {
        const FrameScalars& fs = frame_data[i];
        double t_scaled = fs.t_unscaled * eps;
        auto ode_sigma = ode.at_time(t_scaled);
        TrajRow tr;
        tr.t_scaled = t_scaled;
        for (std::size_t j = 0; j < k; ++j) {
            RunRow row;
            row.t_scaled = t_scaled;
            row.soliton = static_cast<int>(j);
            row.a = fs.sigma[j].a;
            row.v = fs.sigma[j].v;
            row.gamma_mod2pi = mod_2pi(fs.sigma[j].gamma);
            row.mu = fs.sigma[j].mu;
            row.w_h1 = fs.w_h1;
            row.beta_inf = fs.beta_inf;
            row.x_delta = fs.x_delta;
            row.mass = fs.mass;
            row.energy = fs.energy;
            row.energy_gap = fs.gap[j];
            rec.rows.push_back(row);

            tr.a_pde.push_back(fs.sigma[j].a);
            tr.a_ode.push_back(ode_sigma[j].a);
            double err = 0.0;
            for (int m = 0; m < cfg.dim; ++m)
                err = std::max(err, std::abs(fs.sigma[j].a[m] - ode_sigma[j].a[m]));
            tr.max_err = std::max(tr.max_err, err);
        }
        rec.traj.push_back(tr);

        rec.sup_w_h1 = std::max(rec.sup_w_h1, fs.w_h1);
        rec.sup_beta_inf = std::max(rec.sup_beta_inf, fs.beta_inf);
        rec.sup_x_delta = std::max(rec.sup_x_delta, fs.x_delta);
        rec.max_traj_err = std::max(rec.max_traj_err, tr.max_err);
        for (std::size_t j = 0; j < k; ++j)
            rec.mu_drift = std::max(rec.mu_drift,
                                    std::abs(fs.sigma[j].mu - frame_data[0].sigma[j].mu));
        rec.t_reached_scaled = t_scaled;
    }

    // Conservation summaries.
    if (got >= 2) {
        double m0 = frame_data[0].mass, e0 = frame_data[0].energy;
        double worst_mass = 0.0, worst_energy = 0.0;
        for (long i = 1; i < got; ++i) {
            worst_mass = std::max(worst_mass, std::abs(frame_data[i].mass - m0));
            worst_energy = std::max(worst_energy, std::abs(frame_data[i].energy - e0));
        }
        rec.mass_drift_per_step =
            worst_mass / std::abs(m0) / static_cast<double>(steps_per_frame);
        rec.energy_drift = worst_energy / std::abs(e0);
    }

    // Phase-sign pin: compare the measured gamma trajectory of the first
    // soliton against both phase conventions, in unscaled time.
    if (got >= 3) {
        double rp = 0.0, rm = 0.0, acc_p = 0.0, acc_m = 0.0;
        for (long i = 1; i < got; ++i) {
            auto rate = [&](const FrameScalars& fs, double sgn) {
                const SolitonParams& s = fs.sigma[0];
                double v2 = 0.0;
                for (int m = 0; m < cfg.dim; ++m) v2 += s.v[m] * s.v[m];
                return s.mu - potential_value(cfg.potential, eps, s.a, cfg.dim) +
                       sgn * 0.25 * v2;
            };
            double h = frame_data[i].t_unscaled - frame_data[i - 1].t_unscaled;
            acc_p += 0.5 * h * (rate(frame_data[i - 1], +1) + rate(frame_data[i], +1));
            acc_m += 0.5 * h * (rate(frame_data[i - 1], -1) + rate(frame_data[i], -1));
            double dg = frame_data[i].sigma[0].gamma - frame_data[0].sigma[0].gamma;
            rp = std::max(rp, std::abs(dg - acc_p));
            rm = std::max(rm, std::abs(dg - acc_m));
        }
        rec.gamma_resid_plus = rp;
        rec.gamma_resid_minus = rm;
        rec.pinned_phase_sign = rp <= rm ? +1 : -1;
    }

    if (rec.rows.empty()) rec.status = "empty";
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rec;
}

namespace {

std::string csv_header(int dim) {
    std::string h = "t_scaled,soliton_index";
    for (int a = 0; a < dim; ++a) h += ",a" + std::to_string(a);
    for (int a = 0; a < dim; ++a) h += ",v" + std::to_string(a);
    h += ",gamma_mod2pi,mu,w_h1,beta_inf,x_delta,mass,energy,energy_gap";
    return h;
}

} // namespace

void emit_outputs(const RunRecord& rec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "plotdata");

    std::ostringstream csv;
    csv << csv_header(rec.dim) << "\n";
    for (const auto& r : rec.rows) {
        csv << format_double(r.t_scaled) << "," << r.soliton;
        for (int a = 0; a < rec.dim; ++a) csv << "," << format_double(r.a[a]);
        for (int a = 0; a < rec.dim; ++a) csv << "," << format_double(r.v[a]);
        csv << "," << format_double(r.gamma_mod2pi) << "," << format_double(r.mu) << ","
            << format_double(r.w_h1) << "," << format_double(r.beta_inf) << ","
            << format_double(r.x_delta) << "," << format_double(r.mass) << ","
            << format_double(r.energy) << "," << format_double(r.energy_gap) << "\n";
    }
    write_text_file((fs::path(out_dir) / "run.csv").string(), csv.str());

    std::ostringstream tcsv;
    tcsv << "t_scaled";
    std::size_t k = rec.traj.empty() ? 0 : rec.traj[0].a_pde.size();
    for (std::size_t j = 0; j < k; ++j)
        for (int a = 0; a < rec.dim; ++a)
            tcsv << ",a_pde_" << j << "_" << a << ",a_ode_" << j << "_" << a;
    tcsv << ",max_err\n";
    for (const auto& t : rec.traj) {
        tcsv << format_double(t.t_scaled);
        for (std::size_t j = 0; j < k; ++j)
            for (int a = 0; a < rec.dim; ++a)
                tcsv << "," << format_double(t.a_pde[j][a]) << ","
                     << format_double(t.a_ode[j][a]);
        tcsv << "," << format_double(t.max_err) << "\n";
    }
    write_text_file((fs::path(out_dir) / "plotdata" / "trajectory.csv").string(), tcsv.str());

    std::ostringstream ncsv;
    ncsv << "t_scaled,w_h1,beta_inf,x_delta,mass,energy\n";
    for (const auto& r : rec.rows) {
        if (r.soliton != 0) continue; // one line per frame
        ncsv << format_double(r.t_scaled) << "," << format_double(r.w_h1) << ","
             << format_double(r.beta_inf) << "," << format_double(r.x_delta) << ","
             << format_double(r.mass) << "," << format_double(r.energy) << "\n";
    }
    write_text_file((fs::path(out_dir) / "plotdata" / "norms.csv").string(), ncsv.str());

    json s;
    s["status"] = rec.status;
    s["exit_reason"] = rec.exit_reason;
    s["config_hash"] = rec.config_hash;
    s["code_version"] = rec.code_version;
    s["wall_seconds"] = rec.wall_seconds;
    s["eps"] = rec.eps;
    s["eps_v"] = rec.eps_v;
    s["frames"] = rec.traj.size();
    s["sup_w_h1"] = rec.sup_w_h1;
    s["sup_beta_inf"] = rec.sup_beta_inf;
    s["sup_x_delta"] = rec.sup_x_delta;
    s["max_traj_err"] = rec.max_traj_err;
    s["mu_drift"] = rec.mu_drift;
    s["sigma0_shift"] = rec.sigma0_shift;
    s["w0_over_eps_v"] = rec.w0_over_eps_v;
    s["mass_drift_per_step"] = rec.mass_drift_per_step;
    s["energy_drift"] = rec.energy_drift;
    s["gamma_resid_plus"] = rec.gamma_resid_plus;
    s["gamma_resid_minus"] = rec.gamma_resid_minus;
    s["pinned_phase_sign"] = rec.pinned_phase_sign;
    s["window_extensions"] = rec.window_extensions;
    s["sigma_left_box"] = rec.sigma_left_box;
    s["beta_resolution_warning"] = rec.beta_resolution_warning;
    s["t_reached_scaled"] = rec.t_reached_scaled;
    write_text_file((fs::path(out_dir) / "summary.json").string(), s.dump(2) + "\n");
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("fit_loglog needs matched series, n >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double den = n * sxx - sx * sx;
    SlopeFit fit;
    fit.slope = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::log(y[i]) - fit.slope * std::log(x[i]) - fit.intercept;
        ss += r * r;
    }
    if (n > 2) {
        double varx = sxx - sx * sx / n;
        fit.stderr_ = std::sqrt(ss / (n - 2) / varx);
    }
    return fit;
}

SweepResult run_sweep(const ExperimentConfig& base, const std::vector<double>& eps_list) {
    if (eps_list.size() < 3) throw ConfigError("sweep needs at least 3 eps values");
    SweepResult result;
    result.eps_list = eps_list;

    std::vector<std::future<RunRecord>> jobs;
    for (double e : eps_list) {
        ExperimentConfig cfg = base;
        cfg.eps = e;
        // The base horizon is read at the base eps and scales like 1/eps.
        cfg.time.t_end_scaled = base.time.t_end_scaled * base.eps / e;
        jobs.push_back(std::async(std::launch::async, [cfg]() { return run_compare(cfg); }));
    }
    for (auto& j : jobs) {
        try {
            result.members.push_back(j.get());
        } catch (const Error& e) {
            RunRecord r;
            r.status = "failed";
            r.exit_reason = e.what();
            result.members.push_back(r);
            result.partial = true;
        }
    }

    std::vector<double> evs, ws, bs, traj_x, traj_y;
    for (std::size_t i = 0; i < result.members.size(); ++i) {
        const RunRecord& r = result.members[i];
        if (r.status == "failed" || r.status == "empty") {
            result.partial = true;
            result.mu_drift_ok.push_back(false);
            continue;
        }
        if (r.status == "partial") result.partial = true;
        evs.push_back(r.eps_v);
        ws.push_back(r.sup_w_h1);
        bs.push_back(r.sup_beta_inf);
        traj_x.push_back(r.eps_v * r.eps_v / r.eps * r.t_reached_scaled);
        traj_y.push_back(std::max(r.max_traj_err, 1e-300));
        result.mu_drift_ok.push_back(r.mu_drift <= 10.0 * r.eps_v * r.eps_v / r.eps);
    }
    if (evs.size() >= 2) {
        result.w_slope = fit_loglog(evs, ws);
        result.beta_slope = fit_loglog(evs, bs);
        result.traj_slope = fit_loglog(traj_x, traj_y);
    }
    return result;
}

void emit_sweep_outputs(const SweepResult& sweep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < sweep.members.size(); ++i) {
        std::ostringstream os;
        os << "eps_" << sweep.eps_list[i];
        emit_outputs(sweep.members[i], (fs::path(out_dir) / os.str()).string());
    }

    std::ostringstream csv;
    csv << "eps,eps_v,sup_w_h1,sup_beta_inf,max_traj_err,mu_drift,status\n";
    for (std::size_t i = 0; i < sweep.members.size(); ++i) {
        const RunRecord& r = sweep.members[i];
        csv << format_double(sweep.eps_list[i]) << "," << format_double(r.eps_v) << ","
            << format_double(r.sup_w_h1) << "," << format_double(r.sup_beta_inf) << ","
            << format_double(r.max_traj_err) << "," << format_double(r.mu_drift) << ","
            << r.status << "\n";
    }
    write_text_file((fs::path(out_dir) / "slopes.csv").string(), csv.str());

    json s;
    s["partial"] = sweep.partial;
    s["w_slope"] = {{"slope", sweep.w_slope.slope},
                    {"stderr", sweep.w_slope.stderr_},
                    {"ci95", 2.0 * sweep.w_slope.stderr_}};
    s["beta_slope"] = {{"slope", sweep.beta_slope.slope},
                       {"stderr", sweep.beta_slope.stderr_},
                       {"ci95", 2.0 * sweep.beta_slope.stderr_}};
    s["traj_slope"] = {{"slope", sweep.traj_slope.slope},
                       {"stderr", sweep.traj_slope.stderr_},
                       {"ci95", 2.0 * sweep.traj_slope.stderr_}};
    s["mu_drift_ok"] = sweep.mu_drift_ok;
    write_text_file((fs::path(out_dir) / "sweep_summary.json").string(), s.dump(2) + "\n");
}

} // namespace nlslab
