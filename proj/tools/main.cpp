// nlslab: command-line driver for the soliton dynamics laboratory.
//
// Subcommands: ground-state, evolve, decompose, ode, compare, sweep.
// Experiment configs are JSON files with the schema described in README.md;
// unknown keys are rejected.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "nlslab/harness.hpp"
#include "nlslab/io.hpp"

using namespace nlslab;
using nlohmann::json;

namespace {

struct CommonOverrides {
    std::string config_path;
    std::string out_dir;
    double eps = 0.0;
    double h = 0.0;
    std::string phase_sign;
    long frames = 0;
    double dt = 0.0;
};

void add_common(CLI::App* cmd, CommonOverrides& o, bool need_config = true) {
    cmd->set_help_flag("--help", "print help"); // frees -h for the scale exponent
    auto* c = cmd->add_option("--config", o.config_path, "experiment config JSON");
    if (need_config) c->required();
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--eps", o.eps, "override Planck parameter");
    cmd->add_option("--h", o.h, "override potential scale exponent");
    cmd->add_option("--phase-sign", o.phase_sign, "phase convention, + or -")
        ->check(CLI::IsMember({"+", "-"}));
    cmd->add_option("--frames", o.frames, "override number of observation frames");
    cmd->add_option("--dt", o.dt, "override PDE time step (unscaled)");
}

ExperimentConfig resolve(const CommonOverrides& o) {
    ExperimentConfig cfg = load_config_file(o.config_path);
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.eps > 0.0) cfg.eps = o.eps;
    if (o.h > 0.0) cfg.potential.h = o.h;
    if (o.phase_sign == "+") cfg.phase_sign = +1;
    if (o.phase_sign == "-") cfg.phase_sign = -1;
    if (o.frames > 0) cfg.time.cadence_scaled = cfg.time.t_end_scaled / o.frames;
    if (o.dt > 0.0) cfg.time.dt = o.dt;
    return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for multi-soliton dynamics of the semiclassical NLS"};
    app.require_subcommand(1);
    // --h is a domain flag (potential scale exponent), so help is long-form only
    app.set_help_flag("--help", "print help");

    // ground-state
    auto* gs = app.add_subcommand("ground-state", "solve and certify a ground-state profile");
    gs->set_help_flag("--help", "print help");
    double gs_p = 3.0, gs_lambda = 1.0, gs_mu = 1.0, gs_eps = 1.0;
    int gs_dim = 1;
    std::string gs_out;
    gs->add_option("--p", gs_p, "nonlinearity exponent");
    gs->add_option("--lambda", gs_lambda, "nonlinearity coupling");
    gs->add_option("--mu", gs_mu, "eigenvalue");
    gs->add_option("--eps", gs_eps, "Planck parameter");
    gs->add_option("--dim", gs_dim, "spatial dimension (1 or 2)");
    gs->add_option("--out", gs_out, "write the profile document here (JSON)");

    // evolve
    auto* ev = app.add_subcommand("evolve", "evolve the PDE and write observables + checkpoint");
    CommonOverrides ev_o;
    add_common(ev, ev_o);

    // decompose
    auto* dc = app.add_subcommand("decompose", "skew-orthogonal decomposition of a checkpoint");
    CommonOverrides dc_o;
    std::string dc_checkpoint;
    add_common(dc, dc_o);
    dc->add_option("--checkpoint", dc_checkpoint, "gzipped checkpoint JSON")->required();

    // ode
    auto* od = app.add_subcommand("ode", "integrate the effective particle system");
    CommonOverrides od_o;
    add_common(od, od_o);

    // compare
    auto* cp = app.add_subcommand("compare", "PDE + tracking vs effective dynamics");
    CommonOverrides cp_o;
    add_common(cp, cp_o);

    // sweep: here --eps carries the member list
    auto* sw = app.add_subcommand("sweep", "compare across an eps list, fit scaling slopes");
    sw->set_help_flag("--help", "print help");
    CommonOverrides sw_o;
    std::string sw_eps_list;
    sw->add_option("--config", sw_o.config_path, "experiment config JSON")->required();
    sw->add_option("--out", sw_o.out_dir, "output directory");
    sw->add_option("--eps", sw_eps_list, "comma separated eps values (e.g. 0.2,0.1,0.05)")
        ->required();
    sw->add_option("--h", sw_o.h, "override potential scale exponent");
    sw->add_option("--phase-sign", sw_o.phase_sign, "phase convention, + or -")
        ->check(CLI::IsMember({"+", "-"}));
    sw->add_option("--frames", sw_o.frames, "override number of observation frames");
    sw->add_option("--dt", sw_o.dt, "override PDE time step (unscaled)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gs->parsed()) {
            NonlinearitySpec nl(gs_p, gs_lambda, gs_dim);
            GroundStateProfile base = solve_base_profile(nl, gs_dim);
            MuInterval wide{0.5 * gs_mu, 2.0 * gs_mu + 1.0};
            GroundStateProfile prof = rescale(base, gs_mu, gs_eps, wide);
            double box = std::max(80.0 * gs_eps / std::sqrt(gs_mu), 20.0);
            Grid g(gs_dim, gs_dim == 1 ? 4096 : 256, box);
            auto [m, mp] = mass_and_derivative(base, gs_mu);
            auto decay = decay_rate(prof);
            std::printf("p=%g lambda=%g dim=%d mu=%g eps=%g\n", gs_p, gs_lambda, gs_dim, gs_mu,
                        gs_eps);
            std::printf("residual          %.3e (relative L2)\n", relative_residual(prof, g));
            std::printf("mass m(mu)        %.12g\n", m);
            std::printf("mass slope m'(mu) %.12g\n", mp);
            std::printf("decay rate        %.6g per |x|/eps%s\n", decay.rate,
                        decay.window_shrunk ? " (window shrunk)" : "");
            if (!gs_out.empty()) {
                write_text_file(gs_out, profile_to_json(prof).dump(2) + "\n");
                std::printf("profile written to %s\n", gs_out.c_str());
            }
            return 0;
        }

        if (ev->parsed()) {
            ExperimentConfig cfg = resolve(ev_o);
            print_warnings(validate_config(cfg));
            Grid g = make_grid(cfg);
            NonlinearitySpec nl(cfg.p, cfg.lambda, cfg.dim);
            GroundStateProfile base = solve_base_profile(nl, cfg.dim);
            Field psi0 = build_initial_data(cfg, base, g);
            Evolver evolver(g, cfg.eps, nl, cfg.potential);
            EvolutionState st{psi0, 0.0, cfg.eps};
            double dt = cfg.time.dt > 0 ? cfg.time.dt : default_dt(g, cfg.eps);
            double t_end = cfg.time.t_end_scaled / cfg.eps;
            long stride = std::max<long>(1, std::llround(cfg.time.cadence_scaled / cfg.eps / dt));
            auto obs = evolver.evolve(st, t_end, dt, static_cast<int>(stride));

            namespace fs = std::filesystem;
            fs::create_directories(cfg.out_dir);
            std::ostringstream csv;
            csv << "t_unscaled,mass,energy,momentum0" << (cfg.dim == 2 ? ",momentum1" : "")
                << "\n";
            for (const auto& row : obs) {
                csv << format_double(row.t) << "," << format_double(row.mass) << ","
                    << format_double(row.energy) << "," << format_double(row.momentum[0]);
                if (cfg.dim == 2) csv << "," << format_double(row.momentum[1]);
                csv << "\n";
            }
            write_text_file((fs::path(cfg.out_dir) / "observables.csv").string(), csv.str());
            save_checkpoint((fs::path(cfg.out_dir) / "final.json.gz").string(), st);
            std::printf("evolved to t=%g (t'=%g), %zu observation rows, checkpoint written\n",
                        st.t, st.t * cfg.eps, obs.size());
            return 0;
        }

        if (dc->parsed()) {
            ExperimentConfig cfg = resolve(dc_o);
            EvolutionState st = load_checkpoint(dc_checkpoint);
            NonlinearitySpec nl(cfg.p, cfg.lambda, cfg.dim);
            GroundStateProfile base = solve_base_profile(nl, cfg.dim);
            DecomposeOptions opts;
            opts.mu_box = cfg.constants.mu;
            ManifoldPoint guess{cfg.solitons, st.eps};
            Decomposition dec = decompose(st.psi, guess, base, opts);
            json out;
            out["iterations"] = dec.iterations;
            out["residual_max"] = dec.residual.lpNorm<Eigen::Infinity>();
            out["w_h1"] = h1_norm(dec.w, st.eps);
            out["mu_projected"] = dec.mu_projected;
            out["solitons"] = json::array();
            for (const auto& s : dec.point.solitons) {
                std::vector<double> a(s.a.begin(), s.a.begin() + cfg.dim);
                std::vector<double> v(s.v.begin(), s.v.begin() + cfg.dim);
                out["solitons"].push_back(
                    {{"a", a}, {"v", v}, {"gamma", s.gamma}, {"mu", s.mu}});
            }
            std::cout << out.dump(2) << "\n";
            if (!cfg.out_dir.empty()) {
                namespace fs = std::filesystem;
                fs::create_directories(cfg.out_dir);
                write_text_file((fs::path(cfg.out_dir) / "decomposition.json").string(),
                                out.dump(2) + "\n");
            }
            return 0;
        }

        if (od->parsed()) {
            ExperimentConfig cfg = resolve(od_o);
            print_warnings(validate_config(cfg));
            ParticleState st{cfg.solitons, 0.0, cfg.eps, cfg.dim, cfg.potential, cfg.phase_sign};
            ParticleSeries series = integrate(st, cfg.time.t_end_scaled, cfg.time.ode_dt);
            namespace fs = std::filesystem;
            fs::create_directories(cfg.out_dir);
            std::ostringstream csv;
            csv << "t_scaled";
            for (std::size_t j = 0; j < cfg.solitons.size(); ++j) {
                for (int a = 0; a < cfg.dim; ++a) csv << ",a_" << j << "_" << a;
                for (int a = 0; a < cfg.dim; ++a) csv << ",v_" << j << "_" << a;
                csv << ",gamma_" << j << ",mu_" << j;
            }
            csv << "\n";
            for (std::size_t i = 0; i < series.t.size(); ++i) {
                csv << format_double(series.t[i]);
                for (const auto& s : series.s[i]) {
                    for (int a = 0; a < cfg.dim; ++a) csv << "," << format_double(s.a[a]);
                    for (int a = 0; a < cfg.dim; ++a) csv << "," << format_double(s.v[a]);
                    csv << "," << format_double(s.gamma) << "," << format_double(s.mu);
                }
                csv << "\n";
            }
            write_text_file((fs::path(cfg.out_dir) / "ode.csv").string(), csv.str());
            std::printf("integrated to t'=%g; invariant drift %.3e; integral-form residuals "
                        "v %.3e a %.3e gamma %.3e\n",
                        series.t.back(), series.max_invariant_drift,
                        series.integral_residual_v, series.integral_residual_a,
                        series.integral_residual_gamma);
            return 0;
        }

        if (cp->parsed()) {
            ExperimentConfig cfg = resolve(cp_o);
            print_warnings(validate_config(cfg));
            RunRecord rec = run_compare(cfg);
            emit_outputs(rec, cfg.out_dir);
            std::printf("status=%s frames=%zu sup|w|=%.3e sup|beta|=%.3e traj_err=%.3e "
                        "(outputs in %s)\n",
                        rec.status.c_str(), rec.traj.size(), rec.sup_w_h1, rec.sup_beta_inf,
                        rec.max_traj_err, cfg.out_dir.c_str());
            return rec.status == "complete" ? 0 : 2;
        }

        if (sw->parsed()) {
            ExperimentConfig cfg = resolve(sw_o);
            std::vector<double> eps_list;
            std::stringstream ss(sw_eps_list);
            std::string item;
            while (std::getline(ss, item, ',')) eps_list.push_back(std::stod(item));
            SweepResult res = run_sweep(cfg, eps_list);
            emit_sweep_outputs(res, cfg.out_dir);
            std::printf("sweep %s: w slope %.3f, beta slope %.3f, traj slope %.3f (outputs in "
                        "%s)\n",
                        res.partial ? "PARTIAL" : "complete", res.w_slope.slope,
                        res.beta_slope.slope, res.traj_slope.slope, cfg.out_dir.c_str());
            return res.partial ? 2 : 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
