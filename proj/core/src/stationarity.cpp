#include "phswing/coefficients.hpp"
#include "phswing/error.hpp"
#include "phswing/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace phswing {

StationarityReport stationarity_experiment(const RunConfig& config, Trajectory* out)
{
    RunConfig run = config;
    run.params.sigma_C = 0.0;
    run.params.sigma_Q = 0.0;
    run.params.sigma_H = 0.0;
    run.n_paths = 1;
    run.record_every = 1;
    run.record_psd = false;
    run.record_noise = false;
    const Grid& grid = run.grid;
    const double T = grid.t_end();
    run.psd_snapshot_times = {0.9 * T, T};
    run.validate();

    const auto& u = run.controls;
    std::size_t j_star = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (u.U_H[j] != 0.0 || u.dosing[j])
            j_star = j + 1;
    }
    if (j_star >= grid.n_t)
        throw ConfigError("stationarity run needs U_H = 0 and dosing off before the horizon ends");
    if (!(u.U_r.back() > 0.0))
        throw ConfigError("stationarity run needs a positive terminal U_r");

    Trajectory traj = simulate_path(run, 0);

    StationarityReport report;
    report.t_star = grid.t(j_star);
    report.H_star = traj.H[j_star];
    report.T = T;
    report.U_r_final = u.U_r.back();
    report.Q0 = traj.Q.front();
    report.Q_T = traj.Q.back();
    report.q_ratio = report.Q0 > 0.0 ? report.Q_T / report.Q0 : 0.0;
    report.C_T = traj.C.back();
    report.c_sat_star = c_sat(report.H_star, run.params);
    report.c_abs_error = std::abs(report.C_T - report.c_sat_star);
    report.c_rel_error = report.c_abs_error / report.c_sat_star;

    const PsdField& F_tail = traj.snapshots.at(0);
    const PsdField& F_end = traj.snapshots.at(1);
    double max_F = 0.0;
    double change = 0.0;
    for (std::size_t i = 0; i < F_end.size(); ++i) {
        max_F = std::max(max_F, std::abs(F_end[i]));
        change = std::max(change, std::abs(F_end[i] - F_tail[i]));
    }
    report.psd_max = max_F;
    report.psd_tail_change = max_F > 0.0 ? change / max_F : 0.0;
    if (out)
        *out = std::move(traj);
    return report;
}

}  // namespace phswing
