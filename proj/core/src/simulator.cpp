#include "phswing/simulator.hpp"
#include "phswing/coefficients.hpp"
#include "phswing/config.hpp"
#include "phswing/csv.hpp"
#include "phswing/error.hpp"
#include "phswing/oracles.hpp"
#include "phswing/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace phswing {

PsdField make_initial_psd(const InitialPsd& init, const Grid& grid)
{
    if (init.kind == InitialPsdKind::Zero)
        return PsdField(grid.nodes(), 0.0);
    if (!(init.amplitude >= 0.0))
        throw ConfigError("PSD bump amplitude must be non-negative");
    return gaussian_bump(grid, init.center, init.width, init.amplitude);
}

void RunConfig::validate() const
{
    params.validate();
    if (n_paths < 1)
        throw ConfigError("n_paths must be at least 1");
    if (record_every < 1)
        throw ConfigError("record_every must be at least 1");
    if (!(u_min <= u_max))
        throw ConfigError("u_min must not exceed u_max");
    if (grid.nodes() < 5 || !(grid.tau > 0.0) || !(grid.h > 0.0))
        throw ConfigError("invalid grid");
    double cfl = params.k_g * grid.tau / (2.0 * grid.h);
    if (cfl >= 1.0)
        throw CflError("CFL number k_g*tau/(2h) = " + csv::format(cfl) + " >= 1");
    if (controls.size() != grid.n_t + 1)
        throw ConfigError("controls must have one sample per grid time (n_t + 1)");
    controls.validate();
    check_control_box(controls, u_min, u_max);
}

namespace {

bool has_noise(const ModelParams& p)
{
    return p.sigma_C > 0.0 || p.sigma_Q > 0.0 || p.sigma_H > 0.0;
}

std::vector<std::size_t> snapshot_steps(const RunConfig& config)
{
    std::vector<std::size_t> steps;
    for (double t : config.psd_snapshot_times) {
        double j = std::round(t / config.grid.tau);
        j = std::clamp(j, 0.0, static_cast<double>(config.grid.n_t));
        steps.push_back(static_cast<std::size_t>(j));
    }
    return steps;
}

}  // namespace

Trajectory simulate_path(const RunConfig& config, std::size_t path)
{
    const ModelParams& p = config.params;
    const Grid& grid = config.grid;
    const bool noisy = has_noise(p);
    const auto snaps = snapshot_steps(config);

    Trajectory traj;
    traj.path = path;
    PsdField F = make_initial_psd(config.psd, grid);
    std::vector<double> scratch(F.size());
    KineticState state{p.H0, p.Q0, p.C0, p.R0};
    std::size_t dose_steps = 0;

    const double ups00 = psd_moment(F, 0, grid.h);
    PsdStepDiagnostics psd_diag;
    EmDiagnostics em_diag;

    const std::size_t expected = grid.n_t / config.record_every + 2;
    for (auto* v : {&traj.t, &traj.H, &traj.Q, &traj.C, &traj.R, &traj.S})
        v->reserve(expected);
    if (config.record_noise)
        traj.noise.reserve(grid.n_t);

    auto record = [&](std::size_t j) {
        double t = grid.t(j);
        traj.t.push_back(t);
        traj.H.push_back(state.H);
        traj.Q.push_back(state.Q);
        traj.C.push_back(state.C);
        traj.R.push_back(state.R);
        traj.S.push_back(psd_moment(F, 2, grid.h));
        for (int n = 0; n <= 2; ++n) {
            double bound = oracles::moment_bound(n, ups00, grid.length, p.k_g, p.k_N, t);
            if (psd_moment(F, n, grid.h) > bound * (1.0 + 1e-9) + 1e-300)
                ++traj.moment_bound_violations;
        }
        if (config.record_psd)
            traj.psd_history.push_back(F);
    };
    auto snapshot = [&](std::size_t j) {
        for (std::size_t k = 0; k < snaps.size(); ++k) {
            if (snaps[k] == j) {
                traj.snapshot_times.push_back(config.psd_snapshot_times[k]);
                traj.snapshots.push_back(F);
            }
        }
    };

    record(0);
    snapshot(0);
    for (std::size_t j = 0; j < grid.n_t; ++j) {
        const double S = psd_moment(F, 2, grid.h);
        const double U_H = config.controls.U_H[j];
        const double U_r = config.controls.U_r[j];
        const bool dosing = config.controls.dosing[j] != 0;
        const double k_v = inflow_rate(dosing, p);
        const double a = growth_rate(state.C, state.H, p);
        const double N = nucleation_rate(state.C, state.H, p);

        NoiseDraw z;
        if (noisy) {
            z.z1 = counter_normal(config.seed, path, j, kNoiseC);
            z.z2 = counter_normal(config.seed, path, j, kNoiseQ);
            z.z3 = counter_normal(config.seed, path, j, kNoiseH);
        }
        if (config.record_noise)
            traj.noise.push_back(z);

        state = em_step(state, S, U_H, U_r, k_v, z, p, grid.tau, &em_diag);
        if (dosing)
            ++dose_steps;
        // volume from the dose count, so it never accumulates rounding drift
        state.R = p.R0 + grid.tau * p.R_dot * static_cast<double>(dose_steps);

        psd_step_inplace(F, scratch, a, N, grid.tau, grid.h, true, &psd_diag);

        if ((j + 1) % config.record_every == 0 || j + 1 == grid.n_t)
            record(j + 1);
        snapshot(j + 1);
    }

    traj.final_psd = std::move(F);
    traj.clip_Q = em_diag.clip_Q;
    traj.clip_C = em_diag.clip_C;
    traj.psd_clipped = psd_diag.clipped;
    traj.psd_significant_undershoots = psd_diag.significant_undershoots;
    return traj;
}

namespace {

void run_batch(const RunConfig& config, std::size_t first, std::size_t count, std::size_t workers,
               std::vector<Trajectory>& out)
{
    out.assign(count, Trajectory{});
    std::vector<std::exception_ptr> errors(count);
    auto work = [&](std::size_t w) {
        for (std::size_t k = w; k < count; k += workers) {
            try {
                out[k] = simulate_path(config, first + k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (workers <= 1 || count <= 1) {
        work(0);
        workers = 1;
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w)
            threads.emplace_back(work, w);
        for (auto& th : threads)
            th.join();
    }
    for (auto& e : errors) {
        if (e)
            std::rethrow_exception(e);
    }
}

}  // namespace

std::vector<Trajectory> simulate(const RunConfig& config, std::size_t workers)
{
    config.validate();
    workers = std::max<std::size_t>(1, std::min(workers, config.n_paths));
    std::vector<Trajectory> out;
    run_batch(config, 0, config.n_paths, workers, out);
    return out;
}

void for_each_path(const RunConfig& config, std::size_t workers,
                   const std::function<void(Trajectory&&)>& visit)
{
    config.validate();
    workers = std::max<std::size_t>(1, std::min(workers, config.n_paths));
    const std::size_t batch = workers * 16;
    std::vector<Trajectory> chunk;
    for (std::size_t first = 0; first < config.n_paths; first += batch) {
        std::size_t count = std::min(batch, config.n_paths - first);
        run_batch(config, first, count, workers, chunk);
        for (auto& traj : chunk)
            visit(std::move(traj));
    }
}

double cost_J(std::span<const double> Q, std::span<const double> Qbar,
              std::span<const double> U, std::span<const double> Ubar, double alpha, double tau,
              double tracking_weight)
{
    const std::size_t n = Q.size();
    if (n < 2 || Qbar.size() != n || U.size() != n || Ubar.size() != n) {
        throw DataError("cost_J: traces are not on a common grid", ErrorCode::GridMismatch);
    }
    double running = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double dq = Q[j] - Qbar[j];
        double du = U[j] - Ubar[j];
        double f = 0.5 * (tracking_weight * dq * dq + alpha * du * du);
        running += (j == 0 || j + 1 == n) ? 0.5 * f : f;
    }
    double dT = Q[n - 1] - Qbar[n - 1];
    return tau * running + 0.5 * dT * dT;
}

double cost_J(const std::vector<Trajectory>& ensemble, std::span<const double> Qbar,
              std::span<const double> U, std::span<const double> Ubar, double alpha, double tau,
              double tracking_weight)
{
    if (ensemble.empty())
        throw DataError("cost_J: empty ensemble");
    double sum = 0.0;
    for (const auto& traj : ensemble)
        sum += cost_J(traj.Q, Qbar, U, Ubar, alpha, tau, tracking_weight);
    return sum / static_cast<double>(ensemble.size());
}

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& key)
{
    std::vector<double> out;
    for (const auto& cell : csv::split_row(text)) {
        if (cell.empty())
            continue;
        try {
            out.push_back(csv::parse_number(cell, 0, key));
        } catch (const DataError&) {
            throw ConfigError("key '" + key + "': '" + cell + "' is not a number");
        }
    }
    return out;
}

std::size_t to_count(long long value, const char* key, long long minimum)
{
    if (value < minimum)
        throw ConfigError(std::string("key '") + key + "' must be at least " + std::to_string(minimum));
    return static_cast<std::size_t>(value);
}

}  // namespace

RunConfig take_run_config(KeyValueConfig& kv)
{
    RunConfig config;
    config.params = take_params(kv);

    double tau = kv.take_double("tau").value_or(0.01);
    double length = kv.take_double("length").value_or(10.0);
    std::size_t n_x = to_count(kv.take_int("n_x").value_or(64), "n_x", 4);
    std::size_t n_t = 0;
    auto t_end = kv.take_double("t_end");
    auto n_t_key = kv.take_int("n_t");
    if (t_end && n_t_key)
        throw ConfigError("give either t_end or n_t, not both");
    if (n_t_key) {
        n_t = to_count(*n_t_key, "n_t", 1);
    } else {
        double T = t_end.value_or(10.0);
        if (!(tau > 0.0))
            throw ConfigError("time step tau must be positive");
        double steps = std::round(T / tau);
        if (steps < 1.0 || std::abs(steps * tau - T) > 1e-9 * std::max(1.0, T))
            throw ConfigError("t_end must be a positive multiple of tau");
        n_t = static_cast<std::size_t>(steps);
    }
    config.grid = make_grid(tau, n_t, length, n_x, config.params.k_g);

    config.n_paths = to_count(kv.take_int("n_paths").value_or(1), "n_paths", 1);
    auto seed = kv.take_int("seed").value_or(0);
    config.seed = static_cast<std::uint64_t>(seed);
    config.record_every = to_count(kv.take_int("record_every").value_or(1), "record_every", 1);
    if (auto snaps = kv.take("psd_snapshots"))
        config.psd_snapshot_times = parse_list(*snaps, "psd_snapshots");
    config.u_min = kv.take_double("u_min").value_or(-1.0);
    config.u_max = kv.take_double("u_max").value_or(1.0);

    if (auto kind = kv.take("psd_init")) {
        if (*kind == "zero")
            config.psd.kind = InitialPsdKind::Zero;
        else if (*kind == "gaussian")
            config.psd.kind = InitialPsdKind::Gaussian;
        else
            throw ConfigError("psd_init must be zero or gaussian");
    }
    config.psd.center = kv.take_double("psd_center").value_or(config.psd.center);
    config.psd.width = kv.take_double("psd_width").value_or(config.psd.width);
    config.psd.amplitude = kv.take_double("psd_amplitude").value_or(config.psd.amplitude);

    auto file = kv.take("controls");
    auto u_h = kv.take_double("control_u_h");
    auto u_r = kv.take_double("control_u_r");
    auto until = kv.take_double("control_until");
    auto dosing = kv.take_bool("control_dosing");
    if (file) {
        if (u_h || u_r || until || dosing)
            throw ConfigError("'controls' file cannot be combined with control_* keys");
        std::filesystem::path path = *file;
        if (path.is_relative())
            path = kv.base_dir() / path;
        config.controls = controls_on_grid(load_control_csv(path), config.grid);
    } else {
        config.controls = constant_controls(config.grid, u_h.value_or(0.0), u_r.value_or(0.0),
                                            until.value_or(0.0), dosing.value_or(true));
    }
    config.validate();
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    auto kv = KeyValueConfig::load(path);
    auto config = take_run_config(kv);
    kv.ensure_consumed();
    return config;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path.string(), ErrorCode::Io);
    out << "t,H,Q,C,R,S\n";
    for (std::size_t i = 0; i < traj.size(); ++i)
        csv::write_row(out, {traj.t[i], traj.H[i], traj.Q[i], traj.C[i], traj.R[i], traj.S[i]});
}

void write_psd_csv(const std::filesystem::path& path, const Grid& grid, const PsdField& F)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path.string(), ErrorCode::Io);
    out << "x,F\n";
    for (std::size_t i = 0; i < F.size(); ++i)
        csv::write_row(out, {grid.x(i), F[i]});
}

}  // namespace phswing
