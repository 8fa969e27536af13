#pragma once

#include "phswing/controls.hpp"
#include "phswing/kinetics.hpp"
#include "phswing/params.hpp"
#include "phswing/psd_transport.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace phswing {

class KeyValueConfig;

enum class InitialPsdKind { Zero, Gaussian };

struct InitialPsd {
    InitialPsdKind kind = InitialPsdKind::Zero;
    double center = 2.0;
    double width = 0.5;
    double amplitude = 1.0;
};

PsdField make_initial_psd(const InitialPsd& init, const Grid& grid);

struct RunConfig {
    ModelParams params;
    Grid grid;
    ControlSignal controls;  // one sample per grid time
    InitialPsd psd;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    std::size_t record_every = 1;
    std::vector<double> psd_snapshot_times;
    double u_min = -1.0;
    double u_max = 1.0;
    // extra per-path records used by the adjoint sweep
    bool record_noise = false;
    bool record_psd = false;

    // Checks CFL, control length and box, path count; throws ConfigError/CflError.
    void validate() const;
};

struct Trajectory {
    std::size_t path = 0;
    std::vector<double> t;
    std::vector<double> H;
    std::vector<double> Q;
    std::vector<double> C;
    std::vector<double> R;
    std::vector<double> S;
    std::vector<NoiseDraw> noise;       // per step, when record_noise
    std::vector<PsdField> psd_history;  // per record point, when record_psd
    std::vector<double> snapshot_times;
    std::vector<PsdField> snapshots;
    PsdField final_psd;

    std::size_t clip_Q = 0;
    std::size_t clip_C = 0;
    std::size_t psd_clipped = 0;
    std::size_t psd_significant_undershoots = 0;
    std::size_t moment_bound_violations = 0;

    std::size_t size() const { return t.size(); }
};

// Integrates one path: S from the PSD at the start of each step, EM kinetics,
// then one transport step with the coefficients of the same step.
Trajectory simulate_path(const RunConfig& config, std::size_t path);

// Runs all paths on `workers` threads; the result is ordered by path index and
// identical for any worker count.
std::vector<Trajectory> simulate(const RunConfig& config, std::size_t workers = 1);

// Streams paths to `visit` in path order while holding at most a bounded batch in memory.
void for_each_path(const RunConfig& config, std::size_t workers,
                   const std::function<void(Trajectory&&)>& visit);

// Trapezoid integral of (w/2)(Q - Qbar)^2 + (alpha/2)(U - Ubar)^2 plus (Q_T - Qbar_T)^2 / 2,
// for one path on a uniform grid.
double cost_J(std::span<const double> Q, std::span<const double> Qbar,
              std::span<const double> U, std::span<const double> Ubar, double alpha, double tau,
              double tracking_weight = 1.0);

// Ensemble average of cost_J over trajectories recorded at every step.
double cost_J(const std::vector<Trajectory>& ensemble, std::span<const double> Qbar,
              std::span<const double> U, std::span<const double> Ubar, double alpha, double tau,
              double tracking_weight = 1.0);

// Reads run keys (and model parameters) from the config, leaving other keys untouched.
RunConfig take_run_config(KeyValueConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_psd_csv(const std::filesystem::path& path, const Grid& grid, const PsdField& F);

struct StationarityReport {
    double t_star = 0.0;
    double H_star = 0.0;
    double T = 0.0;
    double U_r_final = 0.0;
    double Q0 = 0.0;
    double Q_T = 0.0;
    double q_ratio = 0.0;
    double C_T = 0.0;
    double c_sat_star = 0.0;
    double c_abs_error = 0.0;
    double c_rel_error = 0.0;
    double psd_tail_change = 0.0;  // sup |F(T) - F(0.9T)| / max F(T)
    double psd_max = 0.0;
};

// Noise-free run (all sigma forced to zero) checking the long-time limits after the
// last time t* at which U_H or dosing is active. Throws ConfigError when the
// controls do not satisfy the preconditions (U_r must end positive).
StationarityReport stationarity_experiment(const RunConfig& config, Trajectory* out = nullptr);

}  // namespace phswing
