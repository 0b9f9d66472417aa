#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "nlslab/diagnostics.hpp"
#include "nlslab/modulation.hpp"
#include "nlslab/particle.hpp"

namespace nlslab {

extern const char* const kCodeVersion;

/// Deterministic initial perturbation: a unit-H1 Gaussian envelope scaled by
/// c * eps_v, placed at a configurable offset from the first soliton. The
/// seeded multi-bump mode scatters several phased bumps for robustness
/// studies.
struct PerturbationConfig {
    double c = 0.0;
    double offset = 1.0;
    double width = 0.0; // 0 -> 3 eps
    std::string mode = "bump";
    std::uint64_t seed = 1;
    int count = 3;
};

struct BoxConstants {
    double K = 0.5; // velocity bound (scaled units)
    double L = 6.0; // separation / chart radius
    MuInterval mu{};
    double d = 0.0; // reference-path clearance constant; 0 = not provided
};

struct TimeConfig {
    double t_end_scaled = 1.0;
    double dt = 0.0; // 0 -> min(0.5 dx^2/eps^2, 1e-3)
    double cadence_scaled = 0.01;
    double ode_dt = 1e-3;
};

struct ExperimentConfig {
    int dim = 1;
    int points = 4096;
    double box = 0.0; // 0 -> auto-sized from decay lengths and trajectory span
    double eps = 0.1;
    double p = 3.0;
    double lambda = 1.0;
    PotentialSpec potential{};
    std::vector<SolitonParams> solitons;
    PerturbationConfig perturbation{};
    BoxConstants constants{};
    TimeConfig time{};
    int phase_sign = +1;
    std::string out_dir = "out";
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config_file(const std::string& path);

/// Rejects configurations violating the potential/nonlinearity/initial-data
/// assumptions, naming the assumption letter; returns warnings for the
/// optional reference-path clearance check.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

Grid make_grid(const ExperimentConfig& cfg);

/// psi_0 = sum of the configured solitons plus c * eps_v times the unit-H1
/// envelope.
Field build_initial_data(const ExperimentConfig& cfg, const GroundStateProfile& base,
                         const Grid& g);

struct RunRow {
    double t_scaled = 0.0;
    int soliton = 0;
    std::array<double, 2> a{}, v{};
    double gamma_mod2pi = 0.0, mu = 0.0;
    double w_h1 = 0.0, beta_inf = 0.0, x_delta = 0.0;
    double mass = 0.0, energy = 0.0, energy_gap = 0.0;
};

struct TrajRow {
    double t_scaled = 0.0;
    std::vector<std::array<double, 2>> a_pde, a_ode;
    double max_err = 0.0;
};

struct RunRecord {
    int dim = 1;
    double eps = 0.0, eps_v = 0.0;
    std::vector<RunRow> rows;
    std::vector<TrajRow> traj;

    std::string status = "empty"; // empty | complete | partial
    std::string exit_reason;
    std::uint64_t config_hash = 0;
    std::string code_version;
    double wall_seconds = 0.0;

    double sup_w_h1 = 0.0, sup_beta_inf = 0.0, sup_x_delta = 0.0;
    double max_traj_err = 0.0, mu_drift = 0.0;
    double sigma0_shift = 0.0, w0_over_eps_v = 0.0;
    double mass_drift_per_step = 0.0, energy_drift = 0.0;
    double gamma_resid_plus = 0.0, gamma_resid_minus = 0.0;
    int pinned_phase_sign = 0;
    int window_extensions = 0;
    bool sigma_left_box = false;
    bool beta_resolution_warning = false;
    double t_reached_scaled = 0.0;
};

/// Evolve the PDE with decomposition tracking at the configured cadence,
/// integrate the effective particle system from the decomposed initial
/// parameters, and compare. Decomposition failure terminates gracefully with
/// a partial record.
RunRecord run_compare(const ExperimentConfig& cfg);

/// run.csv, summary.json and plotdata/*.csv under the output directory.
void emit_outputs(const RunRecord& record, const std::string& out_dir);

struct SlopeFit {
    double slope = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0;
};

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct SweepResult {
    std::vector<double> eps_list;
    std::vector<RunRecord> members;
    SlopeFit w_slope;     // log sup ||w||_H1 against log eps_v
    SlopeFit beta_slope;  // log sup |beta|_inf against log eps_v
    SlopeFit traj_slope;  // log trajectory error against log(eps_v^2/eps * t_end')
    std::vector<bool> mu_drift_ok; // drift <= 10 eps_v^2 / eps per member
    bool partial = false;
};

/// Members run concurrently at the listed eps values with fixed h; the base
/// configuration's horizon is interpreted at its own eps and scaled like
/// 1/eps across members.
SweepResult run_sweep(const ExperimentConfig& base, const std::vector<double>& eps_list);

void emit_sweep_outputs(const SweepResult& sweep, const std::string& out_dir);

} // namespace nlslab
