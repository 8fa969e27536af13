#include <doctest.h>

#include "cli.hpp"
#include "generators.hpp"
#include "phswing/controls.hpp"
#include "phswing/csv.hpp"
#include "phswing/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

using namespace phswing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::string src(const char* rel)
{
    return testing::source_path(rel).string();
}

std::size_t count_lines(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        ++n;
    return n;
}

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

const char* kSmallRun = "preset = table\ntau = 0.05\nt_end = 5\nn_paths = 6\nseed = 3\n"
                        "psd_snapshots = 0, 5\ncontrol_u_h = 0.05\ncontrol_u_r = 0.5\ncontrol_until = 2\n";

}  // namespace

TEST_CASE("help lists every registered flag")
{
    auto help = cli::full_help();
    auto flags = cli::registered_flags();
    for (const char* f : {"--config", "--data", "--out", "--seed", "--paths", "--iters", "--experiment",
                          "--raw-diff", "--full-adjoint", "--preset", "--workers", "--window", "--profile"})
        CHECK(std::find(flags.begin(), flags.end(), f) != flags.end());
    for (const auto& f : flags) {
        INFO(f);
        CHECK(help.find(f) != std::string::npos);
    }
    for (const char* sub : {"simulate", "verify-oracles", "fit-manual", "fit-fbssm", "import-ur",
                            "compare-coeffs", "stationarity"})
        CHECK(help.find(sub) != std::string::npos);

    auto h = run_cli({"--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("simulate") != std::string::npos);
}

TEST_CASE("usage errors")
{
    auto none = run_cli({});
    CHECK(none.code == 1);
    CHECK(none.err.rfind("E:USAGE:", 0) == 0);

    auto unknown = run_cli({"simulate", "--config", "x.cfg", "--out", "d", "--bogus"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.rfind("E:USAGE:", 0) == 0);

    auto missing = run_cli({"simulate", "--out", "d"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("--config") != std::string::npos);

    auto preset = run_cli({"compare-coeffs", "--out", "d", "--preset", "wrong"});
    CHECK(preset.code == 1);
    CHECK(preset.err.rfind("E:", 0) == 0);
}

TEST_CASE("missing config and CFL violations map to exit codes")
{
    auto dir = testing::scratch_dir("cli_errors");
    auto nf = run_cli({"simulate", "--config", (dir / "nope.cfg").string(), "--out", (dir / "o").string()});
    CHECK(nf.code == 1);
    CHECK(nf.err.rfind("E:CONFIG_NOT_FOUND:", 0) == 0);

    // k_g tau / 2h = 0.459 * 8 / (2 * 10/64) > 1
    write_text(dir / "cfl.cfg", "tau = 8\nt_end = 80\nlength = 10\nn_x = 64\n");
    auto cfl = run_cli({"simulate", "--config", (dir / "cfl.cfg").string(), "--out", (dir / "o").string()});
    CHECK(cfl.code == 2);
    CHECK(cfl.err.rfind("E:CFL:", 0) == 0);

    write_text(dir / "bad.cfg", "tau = 0.05\nt_end = 1\nmystery = 4\n");
    auto bad = run_cli({"simulate", "--config", (dir / "bad.cfg").string(), "--out", (dir / "o").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.rfind("E:CONFIG:", 0) == 0);
}

TEST_CASE("simulate writes its files and ignores the worker count")
{
    auto dir = testing::scratch_dir("cli_simulate");
    write_text(dir / "run.cfg", kSmallRun);
    auto a = run_cli({"simulate", "--config", (dir / "run.cfg").string(), "--out", (dir / "a").string()});
    REQUIRE(a.code == 0);
    auto b = run_cli({"simulate", "--config", (dir / "run.cfg").string(), "--out", (dir / "b").string(),
                      "--workers", "3"});
    REQUIRE(b.code == 0);
    for (const char* f : {"trajectory.csv", "summary.csv", "psd_0.csv", "psd_1.csv"}) {
        INFO(f);
        REQUIRE(fs::exists(dir / "a" / f));
        CHECK(testing::slurp(dir / "a" / f) == testing::slurp(dir / "b" / f));
    }
    CHECK(count_lines(dir / "a" / "trajectory.csv") == 102);

    auto c = run_cli({"simulate", "--config", (dir / "run.cfg").string(), "--out", (dir / "c").string(),
                      "--seed", "99", "--paths", "2"});
    REQUIRE(c.code == 0);
    CHECK(testing::slurp(dir / "a" / "trajectory.csv") != testing::slurp(dir / "c" / "trajectory.csv"));
    CHECK(c.out.find("paths 2") != std::string::npos);
}

TEST_CASE("coefficient comparison table")
{
    auto dir = testing::scratch_dir("cli_compare");
    auto r = run_cli({"compare-coeffs", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(count_lines(dir / "coefficients.csv") == 1402);
    CHECK(first_line(dir / "coefficients.csv") == "H,P_simplified,P_reference,Csat_simplified,Csat_reference");
}

TEST_CASE("manual fit on a fixture trace")
{
    auto dir = testing::scratch_dir("cli_manual");
    auto r = run_cli({"fit-manual", "--experiment", "2", "--data", src("tests/fixtures/trace_swing.csv"),
                      "--out", (dir / "plain").string()});
    REQUIRE(r.code == 0);
    CHECK(count_lines(dir / "plain" / "ur_manual.csv") == 242);
    CHECK(first_line(dir / "plain" / "ur_manual.csv") == "t,U_H,U_r,dosing");
    CHECK_FALSE(fs::exists(dir / "plain" / "overlay.csv"));

    auto bad = run_cli({"fit-manual", "--experiment", "7", "--data", src("tests/fixtures/trace_swing.csv"),
                        "--out", (dir / "x").string()});
    CHECK(bad.code == 1);

    auto sim = run_cli({"fit-manual", "--experiment", "1", "--data", src("tests/fixtures/trace_ramp.csv"),
                        "--out", (dir / "sim").string(), "--config", src("configs/fit.cfg"), "--paths", "2"});
    REQUIRE(sim.code == 0);
    CHECK(sim.out.find("tracking cost") != std::string::npos);
    CHECK(first_line(dir / "sim" / "overlay.csv")
          == "t,Q_ise,Q_ic,Q_ic_staleness,Q_mean,Q_q05,Q_q95,pH_scaled,H_mean_scaled");

    // the grid length comes from the trace
    write_text(dir / "clash.cfg", "t_end = 100\n");
    auto clash = run_cli({"fit-manual", "--experiment", "1", "--data", src("tests/fixtures/trace_ramp.csv"),
                          "--out", (dir / "c").string(), "--config", (dir / "clash.cfg").string()});
    CHECK(clash.code == 1);
    CHECK(clash.err.rfind("E:CONFIG:", 0) == 0);
}

TEST_CASE("sweep fit on a fixture trace, then replay the fitted control")
{
    auto dir = testing::scratch_dir("cli_fbssm");
    auto r = run_cli({"fit-fbssm", "--data", src("tests/fixtures/trace_swing.csv"), "--config",
                      src("configs/fit.cfg"), "--out", (dir / "fit").string(), "--iters", "3",
                      "--experiment", "1"});
    REQUIRE(r.code == 0);
    for (const char* f : {"ur_fbssm.csv", "j_history.csv", "fitted_trajectory.csv", "overlay.csv"})
        CHECK(fs::exists(dir / "fit" / f));
    CHECK(first_line(dir / "fit" / "j_history.csv") == "iteration,J");
    CHECK(count_lines(dir / "fit" / "j_history.csv") == 5);
    CHECK(first_line(dir / "fit" / "ur_fbssm.csv") == "t,U_H,U_r,dosing");

    // the fitted control is on the 0.25 s grid of fit.cfg, which import.cfg shares
    auto same = run_cli({"import-ur", "--data", (dir / "fit" / "ur_fbssm.csv").string(), "--config",
                         src("configs/import.cfg"), "--out", (dir / "replay").string(), "--paths", "2"});
    REQUIRE(same.code == 0);
    CHECK(same.err.find("W:RESAMPLED") == std::string::npos);
    CHECK(fs::exists(dir / "replay" / "trajectory.csv"));

    // the manual law is sampled every 5 s and has to be interpolated
    REQUIRE(run_cli({"fit-manual", "--experiment", "1", "--data", src("tests/fixtures/trace_swing.csv"),
                     "--out", (dir / "manual").string()}).code == 0);
    auto coarse = run_cli({"import-ur", "--data", (dir / "manual" / "ur_manual.csv").string(), "--config",
                           src("configs/import.cfg"), "--out", (dir / "replay2").string(), "--paths", "2"});
    REQUIRE(coarse.code == 0);
    CHECK(coarse.err.rfind("W:RESAMPLED:", 0) == 0);

    // a control file shorter than the run cannot be extrapolated
    write_text(dir / "short.csv", "t,U_H,U_r,dosing\n0,0,0.1,0\n10,0,0.1,0\n");
    auto shrt = run_cli({"import-ur", "--data", (dir / "short.csv").string(), "--config",
                         src("configs/import.cfg"), "--out", (dir / "replay3").string()});
    CHECK(shrt.code == 1);
    CHECK(shrt.err.rfind("E:GRID_MISMATCH:", 0) == 0);
}

TEST_CASE("stationarity report")
{
    auto dir = testing::scratch_dir("cli_stationarity");
    auto r = run_cli({"stationarity", "--config", src("configs/stationarity.cfg"), "--out", dir.string()});
    REQUIRE(r.code == 0);
    std::ifstream in(dir / "stationarity.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "quantity,value");
    std::map<std::string, double> v;
    while (std::getline(in, line)) {
        auto cells = csv::split_row(line);
        v[cells.at(0)] = std::stod(cells.at(1));
    }
    CHECK(v.at("q_ratio") < 1e-3);
    CHECK(v.at("c_rel_error") < 1e-3);
    CHECK(v.at("psd_tail_change") < 1e-3);
}

TEST_CASE("verify-oracles on the coarse profile")
{
    auto dir = testing::scratch_dir("cli_verify");
    auto r = run_cli({"verify-oracles", "--profile", "coarse", "--paths", "2000", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(count_lines(dir / "verify_report.csv") == 8);
    CHECK(run_cli({"verify-oracles", "--profile", "sloppy"}).code == 1);
}
