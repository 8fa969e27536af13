#include <doctest.h>

#include "generators.hpp"
#include "phswing/coefficients.hpp"
#include "phswing/config.hpp"
#include "phswing/error.hpp"
#include "phswing/manual_fit.hpp"
#include "phswing/simulator.hpp"
#include "phswing/summary.hpp"

#include <cmath>
#include <sstream>

using namespace phswing;

namespace {

RunConfig quiet_run(std::size_t n_t, double tau = 0.01)
{
    RunConfig run;
    run.params.sigma_C = run.params.sigma_Q = run.params.sigma_H = 0.0;
    run.grid = make_grid(tau, n_t, 10.0, 64, run.params.k_g);
    run.controls = constant_controls(run.grid, 0.0, 0.0, 0.0, false);
    return run;
}

RunConfig parse_run(const std::string& text)
{
    std::istringstream in(text);
    auto kv = KeyValueConfig::parse(in);
    auto run = take_run_config(kv);
    kv.ensure_consumed();
    return run;
}

}  // namespace

TEST_CASE("quiescent run stays at its fixed point")
{
    auto run = quiet_run(500);
    auto traj = simulate_path(run, 0);
    REQUIRE(traj.size() == 501);
    for (std::size_t j = 0; j < traj.size(); ++j) {
        REQUIRE(traj.H[j] == run.params.H0);
        REQUIRE(traj.Q[j] == run.params.Q0);
        REQUIRE(traj.C[j] == 0.0);
        REQUIRE(traj.R[j] == run.params.R0);
        REQUIRE(traj.S[j] == 0.0);
    }
}

TEST_CASE("positive U_H with the manual law drives Q down")
{
    auto run = quiet_run(2000);
    run.controls = constant_controls(run.grid, 0.05, 0.0, 1e9, false);
    run.controls = apply_manual_law(run.controls, manual_preset(4));
    REQUIRE(run.controls.U_r[0] > 0.0);
    auto traj = simulate_path(run, 0);
    for (std::size_t j = 1; j < traj.size(); ++j)
        REQUIRE(traj.Q[j] < traj.Q[j - 1]);
}

TEST_CASE("constant pH with dosing gives a near-linear decrease of calcium")
{
    auto run = quiet_run(10000);
    run.controls = constant_controls(run.grid, 0.0, 0.0, 1e9, true);
    run.controls = apply_manual_law(run.controls, manual_preset(4));
    run.record_every = 100;
    auto traj = simulate_path(run, 0);
    // least-squares line through Q(t)
    double n = static_cast<double>(traj.size()), st = 0, sq = 0, stt = 0, stq = 0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        st += traj.t[j];
        sq += traj.Q[j];
        stt += traj.t[j] * traj.t[j];
        stq += traj.t[j] * traj.Q[j];
    }
    double slope = (n * stq - st * sq) / (n * stt - st * st);
    double icpt = (sq - slope * st) / n;
    double ss_res = 0, ss_tot = 0, mean = sq / n;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        double fit = icpt + slope * traj.t[j];
        ss_res += (traj.Q[j] - fit) * (traj.Q[j] - fit);
        ss_tot += (traj.Q[j] - mean) * (traj.Q[j] - mean);
    }
    CHECK(slope < 0.0);
    CHECK(1.0 - ss_res / ss_tot > 0.99);
}

TEST_CASE("volume is rebuilt from the dose count")
{
    auto run = quiet_run(3000);
    run.controls = constant_controls(run.grid, 0.0, 0.0, 12.345, true);
    auto traj = simulate_path(run, 0);
    std::size_t doses = 0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        REQUIRE(traj.R[j] == run.params.R0 + run.grid.tau * run.params.R_dot * static_cast<double>(doses));
        if (j < run.grid.n_t && run.controls.dosing[j])
            ++doses;
    }
    CHECK(doses == 1235);
}

TEST_CASE("record decimation, final sample and snapshots")
{
    auto run = quiet_run(105);
    run.record_every = 10;
    run.psd = InitialPsd{InitialPsdKind::Gaussian, 2.0, 0.5, 1.0};
    run.psd_snapshot_times = {0.0, 0.5, 1.05};
    auto traj = simulate_path(run, 0);
    REQUIRE(traj.size() == 12);
    CHECK(traj.t.back() == doctest::Approx(1.05));
    CHECK(traj.t[3] == doctest::Approx(0.3));
    REQUIRE(traj.snapshots.size() == 3);
    CHECK(traj.snapshots[0] == make_initial_psd(run.psd, run.grid));
    CHECK(traj.snapshots[2] == traj.final_psd);
}

TEST_CASE("runs are identical for any worker count")
{
    auto run = quiet_run(400);
    run.params = ModelParams{};
    run.params.sigma_C = 0.05;
    run.controls = constant_controls(run.grid, 0.05, 0.3, 2.0, true);
    run.psd = InitialPsd{InitialPsdKind::Gaussian, 2.0, 0.5, 1.0};
    run.params.C0 = 1e-5;
    run.n_paths = 13;
    run.seed = 99;
    auto one = simulate(run, 1);
    auto three = simulate(run, 3);
    REQUIRE(one.size() == 13);
    auto dir = testing::scratch_dir("determinism");
    for (std::size_t k = 0; k < one.size(); ++k) {
        REQUIRE(one[k].path == k);
        REQUIRE(one[k].Q == three[k].Q);
        REQUIRE(one[k].C == three[k].C);
        REQUIRE(one[k].final_psd == three[k].final_psd);
        write_trajectory_csv(dir / "a.csv", one[k]);
        write_trajectory_csv(dir / "b.csv", three[k]);
        REQUIRE(testing::slurp(dir / "a.csv") == testing::slurp(dir / "b.csv"));
    }
    CHECK(one[0].Q != one[1].Q);

    std::vector<Trajectory> streamed;
    for_each_path(run, 2, [&](Trajectory&& t) { streamed.push_back(std::move(t)); });
    REQUIRE(streamed.size() == one.size());
    for (std::size_t k = 0; k < one.size(); ++k)
        CHECK(streamed[k].H == one[k].H);
}

TEST_CASE("default noise levels need no clipping and respect the moment bound")
{
    auto run = parse_run("preset = table\ntau = 0.01\nt_end = 20\nn_paths = 16\nseed = 4\n"
                         "control_u_h = 0.05\ncontrol_u_r = 0.5\ncontrol_until = 10\n");
    for (const auto& traj : simulate(run, 2)) {
        CHECK(traj.clip_Q == 0);
        CHECK(traj.clip_C == 0);
        CHECK(traj.moment_bound_violations == 0);
        CHECK(traj.psd_significant_undershoots == 0);
    }
}

TEST_CASE("tracking cost")
{
    const double tau = 0.1;
    const std::size_t n = 51;
    std::vector<double> Q(n, 0.3), Qbar(n, 0.3), U(n, 0.2), Ubar(n, 0.2);
    CHECK(cost_J(Q, Qbar, U, Ubar, 0.1, tau) == 0.0);

    std::vector<double> Q2(n, 0.5), U2(n, 0.7);
    const double T = tau * (n - 1);
    CHECK(cost_J(Q2, Qbar, U2, Ubar, 0.0, tau) == doctest::Approx(T * 0.5 * 0.04 + 0.5 * 0.04));
    CHECK(cost_J(Q2, Qbar, U2, Ubar, 0.1, tau)
          == doctest::Approx(T * 0.5 * (0.04 + 0.1 * 0.25) + 0.5 * 0.04));

    std::vector<double> short_target(n - 1, 0.3);
    try {
        cost_J(Q, short_target, U, Ubar, 0.1, tau);
        FAIL("expected a grid mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GridMismatch);
    }
}

TEST_CASE("run config parsing")
{
    auto run = parse_run("tau = 0.02\nt_end = 3\nn_paths = 5\nseed = 11\nrecord_every = 3\n"
                         "psd_snapshots = 0, 1.5\nK_sp = 3e-9\ncontrol_u_h = 0.1\ncontrol_until = 1\n");
    CHECK(run.grid.n_t == 150);
    CHECK(run.n_paths == 5);
    CHECK(run.seed == 11);
    CHECK(run.params.K_sp == 3e-9);
    CHECK(run.psd_snapshot_times == std::vector<double>{0.0, 1.5});
    CHECK(run.controls.U_H[49] == 0.1);
    CHECK(run.controls.U_H[50] == 0.0);

    CHECK_THROWS_AS(parse_run("t_end = 1\nn_t = 100\n"), ConfigError);
    CHECK_THROWS_AS(parse_run("t_end = 1.005\n"), ConfigError);
    CHECK_THROWS_AS(parse_run("t_end = 1\nbogus_key = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_run("t_end = 1\npsd_init = triangle\n"), ConfigError);
    CHECK_THROWS_AS(parse_run("t_end = 1\ncontrol_u_r = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_run("tau = 1\nt_end = 10\n"), CflError);
}

TEST_CASE("control file referenced relative to the config")
{
    auto dir = testing::scratch_dir("controls_rel");
    {
        std::ofstream c(dir / "u.csv");
        c << "t,U_H,U_r,dosing\n0,0.1,0.2,1\n1,0.1,0.2,0\n";
        std::ofstream cfg(dir / "run.cfg");
        cfg << "tau = 0.1\nt_end = 1\ncontrols = u.csv\n";
    }
    auto run = load_run_config(dir / "run.cfg");
    CHECK(run.controls.size() == 11);
    CHECK(run.controls.U_r[5] == doctest::Approx(0.2));
    CHECK(run.controls.dosing[9] == 1);
    CHECK(run.controls.dosing[10] == 0);
}

TEST_CASE("stationarity experiment preconditions and limits")
{
    auto bad = parse_run("t_end = 10\ncontrol_u_r = 0\n");
    CHECK_THROWS_AS(stationarity_experiment(bad), ConfigError);
    auto never_stops = parse_run("t_end = 10\ncontrol_u_h = 0.01\ncontrol_until = 20\ncontrol_u_r = 0.5\n");
    CHECK_THROWS_AS(stationarity_experiment(never_stops), ConfigError);

    auto run = load_run_config(testing::source_path("configs/stationarity.cfg"));
    Trajectory traj;
    auto rep = stationarity_experiment(run, &traj);
    CHECK(rep.t_star == doctest::Approx(50.0));
    CHECK(rep.q_ratio < 1e-3);
    CHECK(rep.c_rel_error < 1e-3);
    CHECK(rep.psd_tail_change < 1e-6);
    CHECK(traj.size() == run.grid.n_t + 1);
}

TEST_CASE("ensemble summary bands")
{
    auto run = quiet_run(300);
    run.params = ModelParams{};
    run.params.sigma_Q = 0.05;
    run.params.sigma_H = 0.01;
    run.controls = constant_controls(run.grid, 0.05, 0.3, 2.0, true);
    run.n_paths = 40;
    run.seed = 5;
    run.record_every = 30;
    auto ensemble = simulate(run, 1);
    auto s = summarize(ensemble);
    SummaryBuilder builder;
    for (const auto& t : ensemble)
        builder.add(t);
    auto streamed = builder.finish();
    REQUIRE(s.t.size() == ensemble[0].size());
    for (std::size_t f = 0; f < EnsembleSummary::kFields.size(); ++f) {
        for (std::size_t j = 0; j < s.t.size(); ++j) {
            REQUIRE(s.q05[f][j] <= s.mean[f][j]);
            REQUIRE(s.mean[f][j] <= s.q95[f][j]);
            REQUIRE(streamed.mean[f][j] == s.mean[f][j]);
        }
    }
    // mean of Q at the end against a direct average
    double direct = 0.0;
    for (const auto& t : ensemble)
        direct += t.Q.back() / 40.0;
    CHECK(s.mean[1].back() == doctest::Approx(direct).epsilon(1e-14));

    auto dir = testing::scratch_dir("summary");
    write_summary_csv(dir / "s.csv", s);
    std::ifstream in(dir / "s.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,mean_H,q05_H,q95_H,mean_Q,q05_Q,q95_Q,mean_C,q05_C,q95_C,mean_R,q05_R,q95_R,"
                    "mean_S,q05_S,q95_S");
}

TEST_CASE("small ensembles use exact quantiles")
{
    auto run = quiet_run(10);
    run.params.sigma_Q = 0.3;
    run.n_paths = 3;
    run.seed = 8;
    auto ensemble = simulate(run, 1);
    auto s = summarize(ensemble);
    std::vector<double> last{ensemble[0].Q.back(), ensemble[1].Q.back(), ensemble[2].Q.back()};
    std::sort(last.begin(), last.end());
    CHECK(s.q05[1].back() >= last[0]);
    CHECK(s.q95[1].back() <= last[2]);
    CHECK(s.q05[1].back() < s.q95[1].back());
}
