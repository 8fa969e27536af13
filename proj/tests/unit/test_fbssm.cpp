#include <doctest.h>

#include "generators.hpp"
#include "synthetic.hpp"
#include "phswing/coefficients.hpp"
#include "phswing/error.hpp"
#include "phswing/fbssm.hpp"
#include "phswing/kinetics.hpp"
#include "phswing/rng.hpp"

#include <cmath>
#include <numbers>

using namespace phswing;

namespace {

// Directional derivative from the adjoint and the central difference of J.
std::pair<double, double> directional_check(const FbssmProblem& problem, const std::vector<double>& U,
                                            const std::vector<double>& dU, const SweepConfig& sweep,
                                            double eps)
{
    auto ev = fbssm_gradient(problem, U, sweep);
    double adj = 0.0;
    for (std::size_t j = 0; j < U.size(); ++j)
        adj += ev.adjoint.gradient[j] * dU[j];
    auto plus = U, minus = U;
    for (std::size_t j = 0; j < U.size(); ++j) {
        plus[j] += eps * dU[j];
        minus[j] -= eps * dU[j];
    }
    double Jp = fbssm_cost(problem, fbssm_forward(problem, plus, sweep), plus, sweep);
    double Jm = fbssm_cost(problem, fbssm_forward(problem, minus, sweep), minus, sweep);
    return {adj, (Jp - Jm) / (2.0 * eps)};
}

std::vector<double> three_knot_bump(const Grid& g)
{
    const double knots[3] = {0.25, 0.5, 0.75}, weights[3] = {1.0, -0.6, 0.8};
    std::vector<double> dU(g.n_t + 1, 0.0);
    for (std::size_t j = 0; j <= g.n_t; ++j) {
        for (int k = 0; k < 3; ++k) {
            double s = (g.t(j) / g.t_end() - knots[k]) / 0.1;
            dU[j] += weights[k] * std::max(0.0, 1.0 - std::abs(s));
        }
    }
    return dU;
}

}  // namespace

TEST_CASE("martingale coefficient estimator")
{
    std::vector<double> lam{1.0, 2.0, 3.0}, z{0.5, -0.1, 0.3};
    CHECK(estimate_varsigma(lam, z, 0.01, true) == 0.0);
    CHECK(estimate_varsigma(std::vector<double>{2.0}, std::vector<double>{1.0}, 0.01) == 0.0);

    // lambda = c z gives c / sqrt(tau)
    const double c = 0.7, tau = 0.04;
    const std::size_t n = 20000;
    std::vector<double> zs(n), ls(n), flat(n, 1.3);
    for (std::size_t k = 0; k < n; ++k) {
        zs[k] = counter_normal(9, k, 0, 0);
        ls[k] = c * zs[k];
    }
    CHECK(estimate_varsigma(ls, zs, tau) == doctest::Approx(c / std::sqrt(tau)).epsilon(0.03));
    // independent lambda: estimate shrinks like 1/sqrt(n)
    CHECK(std::abs(estimate_varsigma(flat, zs, tau)) < 4.0 * 1.3 / std::sqrt(n * tau));
}

TEST_CASE("control update rule")
{
    SweepConfig sweep;
    std::vector<double> U{0.2, -0.4, 0.9}, zero(3, 0.0);
    auto next = update_ur(U, zero, zero, sweep);
    for (std::size_t j = 0; j < U.size(); ++j)
        CHECK(next[j] == doctest::Approx((1.0 - sweep.eta_tilde) * U[j]).epsilon(1e-15));

    std::vector<double> c(3, 4.0);
    next = update_ur(zero, c, zero, sweep);
    for (double v : next)
        CHECK(v == doctest::Approx(-sweep.eta_hat * 4.0));

    // fixed point U* = -(eta_hat / eta_tilde) lambda, the stationarity relation of the
    // optimality condition with eta_tilde = eta alpha, eta_hat = eta P Q K_sp
    const double eta = 0.02, alpha = 0.1, P = 63.0, Q = 0.04, K_sp = 2.8e-9 * 1e6;
    SweepConfig fp;
    fp.eta_tilde = eta * alpha;
    fp.eta_hat = eta * P * Q * K_sp;
    fp.project = false;
    std::vector<double> lam{0.3, -1.1, 0.05};
    std::vector<double> star(3);
    for (std::size_t j = 0; j < 3; ++j) {
        star[j] = -(fp.eta_hat / fp.eta_tilde) * lam[j];
        CHECK(star[j] == doctest::Approx((1.0 / alpha) * (0.0 - lam[j]) * K_sp * P * Q));
    }
    auto same = update_ur(star, lam, zero, fp);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(same[j] == doctest::Approx(star[j]).epsilon(1e-14));

    std::vector<double> big(3, 100.0);
    next = update_ur(zero, big, zero, sweep);
    for (double v : next)
        CHECK(v == doctest::Approx(-sweep.eta_hat * 100.0));
    sweep.eta_hat = 1.0;
    next = update_ur(zero, big, zero, sweep);
    CHECK(next[0] == sweep.u_min);

    std::vector<double> short_adj(2, 0.0);
    CHECK_THROWS_AS(update_ur(U, short_adj, zero, sweep), DataError);
}

TEST_CASE("adjoint vanishes when the target is met")
{
    auto c = testing::synthetic_case(5.0);
    c.problem.base.controls = constant_controls(c.problem.base.grid, 0.02, 0.0, 2.0, true);
    c.problem.base.psd = InitialPsd{InitialPsdKind::Gaussian, 2.0, 0.5, 1.0};
    RunConfig truth = c.problem.base;
    truth.controls.U_r = c.U_true;
    c.problem.Q_target = simulate_path(truth, 0).Q;
    for (bool full : {false, true}) {
        c.sweep.full_adjoint = full;
        auto ev = fbssm_gradient(c.problem, c.U_true, c.sweep);
        for (double l : ev.adjoint.lambda_Q)
            REQUIRE(l == 0.0);
    }
}

TEST_CASE("deterministic adjoint is the backward quadrature of the residual")
{
    auto c = testing::synthetic_case(4.0);
    const auto& g = c.problem.base.grid;
    std::vector<double> U(g.n_t + 1, 0.0);
    auto fwd = fbssm_forward(c.problem, U, c.sweep);
    const auto& Q = fwd[0].Q;
    std::vector<double> target(g.n_t + 1);
    for (std::size_t j = 0; j <= g.n_t; ++j)
        target[j] = Q[j] - 0.01 * std::cos(g.t(j));
    c.problem.Q_target = target;
    RunConfig run = c.problem.base;
    run.controls.U_r = U;
    auto adj = backward_sweep(run, fwd, target, U, c.sweep);

    // residual r_k = 0.01 cos t_k, so lambda_j = -(1 + tau/2) r_N - tau sum_{k=j}^{N-1} c_k r_k
    const double T = g.t_end();
    const std::size_t n = g.n_t;
    double tail = 0.0;
    for (std::size_t jj = n; jj-- > 0;) {
        tail += (jj == 0 ? 0.5 : 1.0) * 0.01 * std::cos(g.t(jj));
        double discrete = -(1.0 + 0.5 * g.tau) * 0.01 * std::cos(T) - g.tau * tail;
        REQUIRE(adj.lambda_Q[jj] == doctest::Approx(discrete).epsilon(1e-12).scale(0.01));
    }
    // and the continuous limit -int_t^T r - r(T) up to O(tau)
    for (std::size_t j = 0; j <= n; j += 20) {
        double t = g.t(j);
        double exact = -0.01 * (std::sin(T) - std::sin(t)) - 0.01 * std::cos(T);
        CHECK(std::abs(adj.lambda_Q[j] - exact) <= g.tau * 0.01);
    }

    // one backward step by hand
    const std::size_t N = g.n_t;
    const double tau = g.tau, rN = Q[N] - target[N], rM = Q[N - 1] - target[N - 1];
    double lam_N = -(1.0 + 0.5 * tau) * rN;
    CHECK(adj.lambda_Q[N] == doctest::Approx(lam_N).epsilon(1e-14));
    CHECK(adj.lambda_Q[N - 1] == doctest::Approx(lam_N - tau * rM).epsilon(1e-14));
}

TEST_CASE("one backward step with reaction and dilution")
{
    auto c = testing::synthetic_case(1.0);
    auto& run = c.problem.base;
    run.controls = constant_controls(run.grid, 0.0, 0.0, 10.0, true);
    std::vector<double> U(run.grid.n_t + 1, 0.4);
    c.problem.Q_target.assign(run.grid.n_t + 1, 9.0);
    auto fwd = fbssm_forward(c.problem, U, c.sweep);
    RunConfig rec = run;
    rec.controls.U_r = U;
    rec.record_noise = true;
    auto adj = backward_sweep(rec, fwd, c.problem.Q_target, std::vector<double>(U.size(), 0.0), c.sweep);

    const std::size_t N = run.grid.n_t;
    const double tau = run.grid.tau;
    const auto& tr = fwd[0];
    const auto& p = run.params;
    double lam_N = -(1.0 + 0.5 * tau) * (tr.Q[N] - 9.0);
    double dr_dQ = p.K_sp * carbonate_ion(tr.H[N - 1], p) * 0.4;
    double kvt = inflow_rate(true, p) / tr.R[N - 1];
    REQUIRE(kvt > 0.0);
    double gamma = -lam_N * (dr_dQ + kvt) - (tr.Q[N - 1] - 9.0);
    CHECK(adj.lambda_Q[N - 1] == doctest::Approx(lam_N + tau * gamma).epsilon(1e-13));
    CHECK(adj.control_adjoint[N - 1] == doctest::Approx(lam_N).epsilon(1e-13));
}

TEST_CASE("adjoint gradient matches central differences")
{
    auto c = testing::synthetic_case(10.0);
    const auto& g = c.problem.base.grid;
    auto dU = three_knot_bump(g);
    std::vector<double> U = c.U_true;
    for (auto& u : U)
        u = 0.8 * u + 0.05;
    for (bool full : {false, true}) {
        c.sweep.full_adjoint = full;
        for (double eps : {1e-4, 1e-5, 1e-6}) {
            auto [adj, fd] = directional_check(c.problem, U, dU, c.sweep, eps);
            CHECK(std::abs(adj - fd) <= 1e-2 * std::abs(fd));
        }
    }
}

TEST_CASE("full and simplified adjoints agree with dosing, pH drift and a growing PSD")
{
    auto c = testing::synthetic_case(6.0);
    auto& base = c.problem.base;
    base.controls = constant_controls(base.grid, 0.05, 0.0, 3.0, true);
    base.psd = InitialPsd{InitialPsdKind::Gaussian, 2.0, 0.5, 1.0};
    base.params.C0 = 2.0 * c_sat(base.params.H0, base.params);
    RunConfig truth = base;
    truth.controls.U_r = testing::synthetic_true_ur(base.grid);
    c.problem.Q_target = simulate_path(truth, 0).Q;

    std::vector<double> U(base.grid.n_t + 1, 0.1);
    c.sweep.full_adjoint = false;
    auto simple = fbssm_gradient(c.problem, U, c.sweep);
    c.sweep.full_adjoint = true;
    auto full = fbssm_gradient(c.problem, U, c.sweep);
    for (std::size_t j = 0; j < U.size(); ++j)
        REQUIRE(full.adjoint.gradient[j] == doctest::Approx(simple.adjoint.gradient[j]).epsilon(1e-12));
    CHECK(full.adjoint.lambda_F_max_abs == 0.0);

    auto dU = three_knot_bump(base.grid);
    auto [adj, fd] = directional_check(c.problem, U, dU, c.sweep, 1e-5);
    CHECK(std::abs(adj - fd) <= 1e-2 * std::abs(fd));
}

TEST_CASE("sweep iterations decrease J on the synthetic problem")
{
    auto c = testing::synthetic_case(10.0);
    c.sweep.max_iters = 60;
    std::vector<double> seen;
    auto result = fbssm_run(c.problem, c.sweep, [&](std::size_t, double J) { seen.push_back(J); });
    CHECK(result.iterations == 60);
    CHECK(result.J_history.size() == 61);
    CHECK(seen == result.J_history);
    for (std::size_t k = 1; k < result.J_history.size(); ++k)
        REQUIRE(result.J_history[k] <= result.J_history[k - 1] * (1.0 + 1e-3));
    CHECK(result.J_history.back() < 0.05 * result.J_history.front());
    CHECK(result.Q_mean.size() == c.problem.Q_target.size());

    c.sweep.tol_J = 0.05;
    auto early = fbssm_run(c.problem, c.sweep);
    CHECK(early.converged);
    CHECK(early.iterations < 60);
}

TEST_CASE("meeting the target and the reference leaves U nearly unchanged")
{
    auto c = testing::synthetic_case(5.0);
    c.problem.U_ref = c.U_true;
    c.problem.U_init = c.U_true;
    c.sweep.max_iters = 1;
    auto result = fbssm_run(c.problem, c.sweep);
    CHECK(result.J_history.front() == 0.0);
    double norm = 0.0, diff = 0.0;
    for (std::size_t j = 0; j < c.U_true.size(); ++j) {
        norm += c.U_true[j] * c.U_true[j];
        diff += (result.U[j] - c.U_true[j]) * (result.U[j] - c.U_true[j]);
    }
    CHECK(std::sqrt(diff) <= c.sweep.eta_tilde * std::sqrt(norm));
}

TEST_CASE("stochastic sweeps are reproducible across worker counts")
{
    auto c = testing::synthetic_case(3.0);
    c.problem.base.params.sigma_Q = 0.05;
    c.problem.base.n_paths = 8;
    c.sweep.max_iters = 5;
    c.sweep.workers = 1;
    auto a = fbssm_run(c.problem, c.sweep);
    c.sweep.workers = 3;
    auto b = fbssm_run(c.problem, c.sweep);
    CHECK(a.U == b.U);
    CHECK(a.J_history == b.J_history);

    auto ev = fbssm_gradient(c.problem, a.U, c.sweep);
    double biggest = 0.0;
    for (double v : ev.adjoint.varsigma_Q)
        biggest = std::max(biggest, std::abs(v));
    CHECK(biggest > 0.0);
}

TEST_CASE("sweep input validation")
{
    auto c = testing::synthetic_case(2.0);
    c.problem.Q_target.pop_back();
    try {
        fbssm_run(c.problem, c.sweep);
        FAIL("expected a grid mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GridMismatch);
    }
    SweepConfig bad;
    bad.eta_tilde = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = SweepConfig{};
    bad.eta_hat = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
