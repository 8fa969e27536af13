#include "cli.hpp"

#include "phswing/coefficients.hpp"
#include "phswing/config.hpp"
#include "phswing/csv.hpp"
#include "phswing/dataio.hpp"
#include "phswing/error.hpp"
#include "phswing/fbssm.hpp"
#include "phswing/manual_fit.hpp"
#include "phswing/simulator.hpp"
#include "phswing/summary.hpp"
#include "phswing/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace phswing::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string data;
    std::string out;
    std::string preset;
    std::string profile = "default";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> iters;
    std::size_t workers = 1;
    std::size_t window = 1;
    int experiment = 0;
    bool raw_diff = false;
    bool full_adjoint = false;
};

struct Commands {
    std::unique_ptr<CLI::App> app;
    CLI::App* simulate = nullptr;
    CLI::App* verify = nullptr;
    CLI::App* fit_manual = nullptr;
    CLI::App* fit_fbssm = nullptr;
    CLI::App* import_ur = nullptr;
    CLI::App* compare = nullptr;
    CLI::App* stationarity = nullptr;
};

void add_preset(CLI::App* cmd, Options& o)
{
    cmd->add_option("--preset", o.preset, "Parameter preset applied before config overrides")
        ->check(CLI::IsMember({"table", "inline"}));
}

void add_run_flags(CLI::App* cmd, Options& o)
{
    cmd->add_option("--seed", o.seed, "Random seed (overrides the config)");
    cmd->add_option("--paths", o.paths, "Number of sample paths (overrides the config)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--workers", o.workers, "Worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
}

Commands make_commands(Options& o)
{
    Commands c;
    c.app = std::make_unique<CLI::App>("Simulation and inverse design for pH-swing CaCO3 precipitation",
                                       "phswing");
    c.app->require_subcommand(1);
    c.app->set_help_all_flag("--help-all", "Print help for every subcommand");

    c.simulate = c.app->add_subcommand("simulate", "Run the coupled PSD/kinetics model");
    c.simulate->add_option("--config", o.config, "Run config file")->required();
    c.simulate->add_option("--out", o.out, "Output directory")->required();
    add_run_flags(c.simulate, o);
    add_preset(c.simulate, o);

    c.verify = c.app->add_subcommand("verify-oracles", "Check the solver against closed-form oracles");
    c.verify->add_option("--profile", o.profile, "Tolerance profile")
        ->check(CLI::IsMember({"default", "coarse"}));
    c.verify->add_option("--seed", o.seed, "Random seed for the Monte Carlo checks");
    c.verify->add_option("--paths", o.paths, "Monte Carlo paths per check")->check(CLI::PositiveNumber);
    c.verify->add_option("--out", o.out, "Optional directory for verify_report.csv");

    c.fit_manual = c.app->add_subcommand("fit-manual", "Apply the manual U_r law to a measured trace");
    c.fit_manual->add_option("--experiment", o.experiment, "Manual-law preset (1..4)")->required();
    c.fit_manual->add_option("--data", o.data, "Trace CSV (t,pH,ca_ise[,ca_ic])")->required();
    c.fit_manual->add_option("--out", o.out, "Output directory")->required();
    c.fit_manual->add_option("--config", o.config, "Run config; when given, also simulate the fit");
    c.fit_manual->add_flag("--raw-diff", o.raw_diff, "Use raw pH differences instead of rates");
    c.fit_manual->add_option("--window", o.window, "Moving-average window for U_H")
        ->check(CLI::PositiveNumber);
    add_run_flags(c.fit_manual, o);
    add_preset(c.fit_manual, o);

    c.fit_fbssm = c.app->add_subcommand("fit-fbssm", "Fit U_r to a measured trace by forward-backward sweeps");
    c.fit_fbssm->add_option("--data", o.data, "Trace CSV (t,pH,ca_ise[,ca_ic])")->required();
    c.fit_fbssm->add_option("--config", o.config, "Run and sweep config file (built-in defaults if omitted)");
    c.fit_fbssm->add_option("--out", o.out, "Output directory")->required();
    c.fit_fbssm->add_option("--iters", o.iters, "Maximum number of sweeps (overrides max_iters)");
    c.fit_fbssm->add_option("--experiment", o.experiment,
                            "Manual-law preset used as reference and initial U_r (1..4)");
    c.fit_fbssm->add_flag("--full-adjoint", o.full_adjoint, "Carry lambda_C, lambda_H, lambda_F too");
    c.fit_fbssm->add_flag("--raw-diff", o.raw_diff, "Use raw pH differences instead of rates");
    c.fit_fbssm->add_option("--window", o.window, "Moving-average window for U_H")
        ->check(CLI::PositiveNumber);
    add_run_flags(c.fit_fbssm, o);
    add_preset(c.fit_fbssm, o);

    c.import_ur = c.app->add_subcommand("import-ur", "Simulate with an external U_r control CSV");
    c.import_ur->add_option("--data", o.data, "Control CSV (t,U_H,U_r,dosing)")->required();
    c.import_ur->add_option("--config", o.config, "Run config file")->required();
    c.import_ur->add_option("--out", o.out, "Output directory")->required();
    add_run_flags(c.import_ur, o);
    add_preset(c.import_ur, o);

    c.compare = c.app->add_subcommand("compare-coeffs", "Tabulate simplified vs reference chemistry");
    c.compare->add_option("--out", o.out, "Output directory")->required();
    c.compare->add_option("--config", o.config, "Optional parameter overrides");
    add_preset(c.compare, o);

    c.stationarity = c.app->add_subcommand("stationarity", "Long-time run after the dosing cutoff");
    c.stationarity->add_option("--config", o.config, "Run config file")->required();
    c.stationarity->add_option("--out", o.out, "Output directory")->required();
    add_preset(c.stationarity, o);
    return c;
}

KeyValueConfig load_config(const Options& o)
{
    KeyValueConfig kv;
    if (!o.config.empty())
        kv = KeyValueConfig::load(o.config);
    if (!o.preset.empty())
        kv.set("preset", o.preset);
    return kv;
}

fs::path prepare_out(const Options& o)
{
    fs::path out = o.out;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw DataError("cannot create output directory " + out.string(), ErrorCode::Io);
    return out;
}

void apply_overrides(RunConfig& run, const Options& o)
{
    if (o.seed)
        run.seed = *o.seed;
    if (o.paths)
        run.n_paths = *o.paths;
}

struct RunOutputs {
    EnsembleSummary summary;
    Trajectory first;
    std::size_t clips = 0;
    std::size_t bound_violations = 0;
    std::size_t undershoots = 0;
};

RunOutputs run_and_write(const RunConfig& run, const Options& o, const fs::path& out)
{
    RunOutputs r;
    SummaryBuilder builder;
    for_each_path(run, o.workers, [&](Trajectory&& traj) {
        builder.add(traj);
        r.clips += traj.clip_Q + traj.clip_C;
        r.bound_violations += traj.moment_bound_violations;
        r.undershoots += traj.psd_significant_undershoots;
        if (traj.path == 0)
            r.first = std::move(traj);
    });
    r.summary = builder.finish();
    write_trajectory_csv(out / "trajectory.csv", r.first);
    write_summary_csv(out / "summary.csv", r.summary);
    for (std::size_t k = 0; k < r.first.snapshots.size(); ++k) {
        write_psd_csv(out / ("psd_" + std::to_string(k) + ".csv"), run.grid, r.first.snapshots[k]);
    }
    return r;
}

void report_run(std::ostream& os, const RunConfig& run, const RunOutputs& r)
{
    os << "paths " << run.n_paths << ", steps " << run.grid.n_t << ", tau " << csv::format(run.grid.tau)
       << ", cfl " << csv::format(run.grid.cfl) << '\n';
    os << "clipped Q/C values " << r.clips << ", PSD undershoots below -1e-12 " << r.undershoots
       << ", moment-bound violations " << r.bound_violations << '\n';
    if (!r.first.Q.empty()) {
        os << "final path 0: H " << csv::format(r.first.H.back()) << ", Q "
           << csv::format(r.first.Q.back()) << ", C " << csv::format(r.first.C.back()) << '\n';
    }
}

int cmd_simulate(const Options& o, std::ostream& os)
{
    auto kv = load_config(o);
    RunConfig run = take_run_config(kv);
    kv.ensure_consumed();
    apply_overrides(run, o);
    run.validate();
    auto out = prepare_out(o);
    auto r = run_and_write(run, o, out);
    report_run(os, run, r);
    return 0;
}

int cmd_verify(const Options& o, std::ostream& os)
{
    VerifyOptions options;
    options.profile = parse_verify_profile(o.profile);
    if (o.seed)
        options.seed = *o.seed;
    if (o.paths)
        options.paths = *o.paths;
    auto results = run_oracle_battery(options);
    bool ok = true;
    for (const auto& r : results) {
        os << (r.passed ? "PASS " : "FAIL ") << r.name << " measured=" << csv::format(r.measured)
           << " (" << r.detail << ")\n";
        ok = ok && r.passed;
    }
    if (!o.out.empty()) {
        auto out = prepare_out(o);
        std::ofstream report(out / "verify_report.csv");
        report << "check,passed,measured\n";
        for (const auto& r : results)
            report << r.name << ',' << (r.passed ? 1 : 0) << ',' << csv::format(r.measured) << '\n';
    }
    return ok ? 0 : 1;
}

// Grid, initial state and U_H taken from a measured trace; U_r left at zero.
struct DataRun {
    RunConfig run;
    std::vector<double> Q_target;
    std::vector<double> times;
};

DataRun build_data_run(KeyValueConfig& kv, const ExperimentTrace& trace, const Options& o)
{
    for (const char* key : {"t_end", "n_t", "controls", "control_u_h", "control_u_r", "control_until",
                            "control_dosing"}) {
        if (kv.contains(key))
            throw ConfigError(std::string("key '") + key + "' is taken from the data trace");
    }
    if (trace.size() < 2)
        throw DataError("trace needs at least 2 samples");
    double tau = kv.take_double("tau").value_or(0.01);
    if (!(tau > 0.0))
        throw ConfigError("time step tau must be positive");
    kv.set("tau", csv::format(tau));
    double span = trace.t_end() - trace.t_begin();
    auto n_t = static_cast<long long>(std::floor(span / tau + 1e-9));
    if (n_t < 1)
        throw DataError("trace is shorter than one time step");
    kv.set("n_t", std::to_string(n_t));
    if (!kv.contains("H0"))
        kv.set("H0", csv::format(trace.pH.front()));
    if (!kv.contains("Q0"))
        kv.set("Q0", csv::format(trace.ca_ise.front()));

    DataRun d;
    d.run = take_run_config(kv);
    std::vector<double> times;
    for (std::size_t j = 0; j <= d.run.grid.n_t; ++j)
        times.push_back(d.run.grid.t(j));

    Signal uh = derive_uh(trace, o.window, o.raw_diff);
    Signal ise{trace.t, trace.ca_ise};
    for (auto* sig : {&uh, &ise}) {
        for (double& t : sig->t)
            t -= trace.t_begin();
    }
    auto& u = d.run.controls;
    u.U_H = resample_linear(uh, times);
    u.U_r.assign(times.size(), 0.0);
    for (std::size_t j = 0; j < times.size(); ++j)
        u.dosing[j] = u.U_H[j] > 0.0 ? 1 : 0;
    d.Q_target = resample_linear(ise, times);
    d.times = std::move(times);
    return d;
}

int cmd_fit_manual(const Options& o, std::ostream& os)
{
    auto kappa = manual_preset(o.experiment);
    auto trace = load_trace(o.data);
    trace.experiment_id = o.experiment;
    auto out = prepare_out(o);

    Signal uh = derive_uh(trace, o.window, o.raw_diff);
    ControlSignal manual;
    manual.t = uh.t;
    manual.U_H = uh.value;
    manual.U_r = manual_ur(uh.value, kappa);
    for (double v : manual.U_H)
        manual.dosing.push_back(v > 0.0 ? 1 : 0);
    write_control_csv(out / "ur_manual.csv", manual);
    os << "manual law k_rc " << csv::format(kappa.k_rc) << ", clamps [" << csv::format(kappa.k_minus_uc)
       << ", " << csv::format(kappa.k_plus_uc) << "] applied to " << manual.size() << " samples\n";

    if (!o.config.empty()) {
        auto kv = load_config(o);
        auto d = build_data_run(kv, trace, o);
        // sweep keys are accepted so one config serves both fit commands
        take_sweep_config(kv);
        kv.ensure_consumed();
        apply_overrides(d.run, o);
        d.run.controls = apply_manual_law(d.run.controls, kappa);
        d.run.validate();
        auto r = run_and_write(d.run, o, out);
        export_overlay_csv(out / "overlay.csv", r.summary, &trace);
        // trapezoid on the recorded times, which are sparser than the grid when record_every > 1
        const auto& ts = r.summary.t;
        auto target = resample_linear(Signal{d.times, d.Q_target}, ts);
        double J = 0.0;
        for (std::size_t i = 1; i < ts.size(); ++i) {
            double a = r.summary.mean[1][i - 1] - target[i - 1], b = r.summary.mean[1][i] - target[i];
            J += 0.25 * (ts[i] - ts[i - 1]) * (a * a + b * b);
        }
        report_run(os, d.run, r);
        os << "tracking cost of the mean Q " << csv::format(J) << '\n';
    }
    return 0;
}

int cmd_fit_fbssm(const Options& o, std::ostream& os)
{
    auto trace = load_trace(o.data);
    trace.experiment_id = o.experiment;
    auto kv = load_config(o);
    const bool paths_in_config = kv.contains("n_paths");
    auto d = build_data_run(kv, trace, o);
    SweepConfig sweep = take_sweep_config(kv);
    kv.ensure_consumed();
    apply_overrides(d.run, o);
    const auto& p = d.run.params;
    const bool noisy = p.sigma_C > 0.0 || p.sigma_Q > 0.0 || p.sigma_H > 0.0;
    if (!o.paths && !paths_in_config)
        d.run.n_paths = noisy ? 8 : 1;
    if (o.iters)
        sweep.max_iters = *o.iters;
    sweep.full_adjoint = sweep.full_adjoint || o.full_adjoint;
    sweep.workers = o.workers;
    sweep.u_min = d.run.u_min;
    sweep.u_max = d.run.u_max;
    d.run.validate();

    FbssmProblem problem;
    problem.base = d.run;
    problem.Q_target = d.Q_target;
    if (o.experiment != 0) {
        problem.U_ref = manual_ur(d.run.controls.U_H, manual_preset(o.experiment));
        problem.U_init = problem.U_ref;
    }
    auto out = prepare_out(o);
    auto result = fbssm_run(problem, sweep);

    ControlSignal fitted = d.run.controls;
    fitted.U_r = result.U;
    write_control_csv(out / "ur_fbssm.csv", fitted);
    {
        std::ofstream history(out / "j_history.csv");
        history << "iteration,J\n";
        for (std::size_t k = 0; k < result.J_history.size(); ++k)
            history << k << ',' << csv::format(result.J_history[k]) << '\n';
    }
    write_trajectory_csv(out / "fitted_trajectory.csv", result.fitted);
    RunConfig final_run = d.run;
    final_run.controls = fitted;
    final_run.validate();
    SummaryBuilder builder;
    for_each_path(final_run, o.workers, [&](Trajectory&& traj) { builder.add(traj); });
    export_overlay_csv(out / "overlay.csv", builder.finish(), &trace);

    os << "iterations " << result.iterations << ", J " << csv::format(result.J_history.front())
       << " -> " << csv::format(result.J_history.back()) << (result.converged ? " (converged)" : "")
       << '\n';
    return 0;
}

int cmd_import_ur(const Options& o, std::ostream& os, std::ostream& err)
{
    auto kv = load_config(o);
    for (const char* key : {"controls", "control_u_h", "control_u_r", "control_until", "control_dosing"}) {
        if (kv.contains(key))
            throw ConfigError(std::string("key '") + key + "' conflicts with the imported controls");
    }
    RunConfig run = take_run_config(kv);
    kv.ensure_consumed();
    apply_overrides(run, o);
    auto external = load_control_csv(o.data);
    bool resampled = false;
    run.controls = controls_on_grid(external, run.grid, &resampled);
    if (resampled) {
        err << "W:RESAMPLED: " << o.data << " has " << external.size()
            << " samples not aligned with the run grid (" << run.grid.n_t + 1
            << " samples, tau " << csv::format(run.grid.tau) << "); interpolated\n";
    }
    run.validate();
    auto out = prepare_out(o);
    auto r = run_and_write(run, o, out);
    report_run(os, run, r);
    return 0;
}

int cmd_compare(const Options& o, std::ostream& os)
{
    ModelParams params = o.preset.empty() ? ModelParams{} : preset_params(parse_preset(o.preset));
    if (!o.config.empty()) {
        auto kv = load_config(o);
        params = take_params(kv, params);
        kv.ensure_consumed();
    }
    auto out = prepare_out(o);
    std::ofstream table(out / "coefficients.csv");
    if (!table)
        throw DataError("cannot write coefficients.csv", ErrorCode::Io);
    table << "H,P_simplified,P_reference,Csat_simplified,Csat_reference\n";
    const int steps = 1400;
    for (int k = 0; k <= steps; ++k) {
        double H = 14.0 * k / steps;
        csv::write_row(table, {H, carbonate_ion(H, params), reference_carbonate_ion(H, params),
                               c_sat(H, params), reference_c_sat(H, params)});
    }
    os << "wrote " << steps + 1 << " rows to " << (out / "coefficients.csv").string() << '\n';
    return 0;
}

int cmd_stationarity(const Options& o, std::ostream& os)
{
    auto kv = load_config(o);
    RunConfig run = take_run_config(kv);
    kv.ensure_consumed();
    auto out = prepare_out(o);
    Trajectory traj;
    auto rep = stationarity_experiment(run, &traj);
    write_trajectory_csv(out / "trajectory.csv", traj);
    std::ofstream csv_out(out / "stationarity.csv");
    csv_out << "quantity,value\n";
    const std::pair<const char*, double> rows[] = {
        {"t_star", rep.t_star}, {"H_star", rep.H_star}, {"T", rep.T},
        {"U_r_final", rep.U_r_final}, {"Q0", rep.Q0}, {"Q_T", rep.Q_T},
        {"q_ratio", rep.q_ratio}, {"C_T", rep.C_T}, {"c_sat_star", rep.c_sat_star},
        {"c_rel_error", rep.c_rel_error}, {"psd_tail_change", rep.psd_tail_change},
    };
    for (const auto& [name, value] : rows) {
        csv_out << name << ',' << csv::format(value) << '\n';
        os << name << " = " << csv::format(value) << '\n';
    }
    return 0;
}

void write_error(std::ostream& err, std::string_view code, const std::string& message)
{
    err << "E:" << code << ": " << message << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Options o;
    Commands c = make_commands(o);
    try {
        c.app->parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return c.app->exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return c.app->exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        write_error(err, "USAGE", e.what());
        return 1;
    }
    try {
        if (c.simulate->parsed())
            return cmd_simulate(o, out);
        if (c.verify->parsed())
            return cmd_verify(o, out);
        if (c.fit_manual->parsed())
            return cmd_fit_manual(o, out);
        if (c.fit_fbssm->parsed())
            return cmd_fit_fbssm(o, out);
        if (c.import_ur->parsed())
            return cmd_import_ur(o, out, err);
        if (c.compare->parsed())
            return cmd_compare(o, out);
        if (c.stationarity->parsed())
            return cmd_stationarity(o, out);
    } catch (const Error& e) {
        write_error(err, error_code_name(e.code()), e.what());
        return is_numerical(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        write_error(err, "INTERNAL", e.what());
        return 1;
    }
    write_error(err, "USAGE", "no subcommand given");
    return 1;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"phswing"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string full_help()
{
    Options o;
    Commands c = make_commands(o);
    std::string text = c.app->help();
    for (auto* sub : c.app->get_subcommands({}))
        text += "\n" + sub->help();
    return text;
}

std::vector<std::string> registered_flags()
{
    Options o;
    Commands c = make_commands(o);
    std::vector<std::string> flags;
    auto collect = [&](CLI::App* app) {
        for (const auto* opt : app->get_options({})) {
            for (const auto& name : opt->get_lnames())
                flags.push_back("--" + name);
        }
    };
    collect(c.app.get());
    for (auto* sub : c.app->get_subcommands({}))
        collect(sub);
    std::sort(flags.begin(), flags.end());
    flags.erase(std::unique(flags.begin(), flags.end()), flags.end());
    return flags;
}

}  // namespace phswing::cli
