#include "phswing/fbssm.hpp"
#include "phswing/coefficients.hpp"
#include "phswing/config.hpp"
#include "phswing/error.hpp"

#include <algorithm>
#include <cmath>

namespace phswing {

void SweepConfig::validate() const
{
    if (!(eta_tilde > 0.0 && eta_tilde < 1.0))
        throw ConfigError("eta_tilde must lie in (0, 1)");
    if (!(eta_hat > 0.0))
        throw ConfigError("eta_hat must be positive");
    if (!(alpha >= 0.0))
        throw ConfigError("alpha must be non-negative");
    if (!(tol_J >= 0.0))
        throw ConfigError("tol_J must be non-negative");
    if (!(tracking_weight >= 0.0))
        throw ConfigError("tracking_weight must be non-negative");
    if (!(u_min <= u_max))
        throw ConfigError("u_min must not exceed u_max");
}

SweepConfig take_sweep_config(KeyValueConfig& kv)
{
    SweepConfig sweep;
    sweep.eta_tilde = kv.take_double("eta_tilde").value_or(sweep.eta_tilde);
    sweep.eta_hat = kv.take_double("eta_hat").value_or(sweep.eta_hat);
    sweep.alpha = kv.take_double("alpha").value_or(sweep.alpha);
    if (auto iters = kv.take_int("max_iters")) {
        if (*iters < 0)
            throw ConfigError("max_iters must be non-negative");
        sweep.max_iters = static_cast<std::size_t>(*iters);
    }
    sweep.tol_J = kv.take_double("tol_J").value_or(sweep.tol_J);
    sweep.tracking_weight = kv.take_double("tracking_weight").value_or(sweep.tracking_weight);
    sweep.project = kv.take_bool("project").value_or(sweep.project);
    sweep.full_adjoint = kv.take_bool("full_adjoint").value_or(sweep.full_adjoint);
    sweep.validate();
    return sweep;
}

double estimate_varsigma(std::span<const double> lambda_next, std::span<const double> z,
                         double tau, bool deterministic)
{
    if (deterministic || lambda_next.size() < 2 || z.size() != lambda_next.size())
        return 0.0;
    double sum = 0.0;
    for (std::size_t p = 0; p < z.size(); ++p)
        sum += z[p] * lambda_next[p];
    return sum / static_cast<double>(z.size()) / std::sqrt(tau);
}

namespace {

double trapezoid_weight(std::size_t j, std::size_t n_t)
{
    return (j == 0 || j == n_t) ? 0.5 : 1.0;
}

struct PathState {
    double lambda_Q = 0.0;
    double lambda_C = 0.0;
    double lambda_H = 0.0;
    std::vector<double> lambda_F;
};

}  // namespace

AdjointTrajectory backward_sweep(const RunConfig& run, const std::vector<Trajectory>& forward,
                                 std::span<const double> Q_target, std::span<const double> U_ref,
                                 const SweepConfig& sweep)
{
    const ModelParams& p = run.params;
    const Grid& grid = run.grid;
    const std::size_t n_t = grid.n_t;
    const std::size_t n_paths = forward.size();
    const double tau = grid.tau;
    const double sq = std::sqrt(tau);
    const double w = sweep.tracking_weight;
    const bool full = sweep.full_adjoint;
    const bool deterministic = p.sigma_C == 0.0 && p.sigma_Q == 0.0 && p.sigma_H == 0.0;
    const auto& U = run.controls.U_r;

    if (n_paths == 0)
        throw DataError("backward sweep needs a forward ensemble");
    if (Q_target.size() != n_t + 1 || U_ref.size() != n_t + 1 || U.size() != n_t + 1)
        throw DataError("adjoint inputs are not on the run grid", ErrorCode::GridMismatch);
    for (const auto& traj : forward) {
        if (traj.size() != n_t + 1)
            throw DataError("forward trajectories must be recorded at every step");
        if (traj.noise.size() != n_t)
            throw DataError("forward trajectories carry no noise record");
        if (full && traj.psd_history.size() != n_t + 1)
            throw DataError("full adjoint needs the PSD at every step");
    }

    AdjointTrajectory out;
    out.lambda_Q.assign(n_t + 1, 0.0);
    out.lambda_C.assign(n_t + 1, 0.0);
    out.lambda_H.assign(n_t + 1, 0.0);
    out.varsigma_Q.assign(n_t, 0.0);
    out.control_adjoint.assign(n_t + 1, 0.0);
    out.gradient.assign(n_t + 1, 0.0);

    std::vector<PathState> state(n_paths);
    const double inv_paths = 1.0 / static_cast<double>(n_paths);
    for (std::size_t k = 0; k < n_paths; ++k) {
        const auto& traj = forward[k];
        double dq = traj.Q[n_t] - Q_target[n_t];
        state[k].lambda_Q = -(1.0 + tau * trapezoid_weight(n_t, n_t) * w) * dq;
        if (full)
            state[k].lambda_F.assign(grid.nodes(), 0.0);
    }
    auto store_means = [&](std::size_t j) {
        double lq = 0.0, lc = 0.0, lh = 0.0;
        for (const auto& s : state) {
            lq += s.lambda_Q;
            lc += s.lambda_C;
            lh += s.lambda_H;
        }
        out.lambda_Q[j] = lq * inv_paths;
        out.lambda_C[j] = lc * inv_paths;
        out.lambda_H[j] = lh * inv_paths;
    };
    store_means(n_t);
    out.control_adjoint[n_t] = out.lambda_Q[n_t] - out.lambda_C[n_t];
    out.gradient[n_t] = tau * sweep.alpha * trapezoid_weight(n_t, n_t) * (U[n_t] - U_ref[n_t]);

    std::vector<double> lam(n_paths), zs(n_paths);
    std::vector<double> dG(grid.nodes()), next_F(grid.nodes());
    const double v_nuc = p.v_nuc();

    for (std::size_t jj = n_t; jj-- > 0;) {
        const std::size_t j = jj;
        const double c_j = trapezoid_weight(j, n_t);
        const double k_v = inflow_rate(run.controls.dosing[j] != 0, p);

        auto varsigma = [&](auto lambda_of, auto z_of) {
            for (std::size_t k = 0; k < n_paths; ++k) {
                lam[k] = lambda_of(state[k]);
                zs[k] = z_of(forward[k].noise[j]);
            }
            return estimate_varsigma(lam, zs, tau, deterministic);
        };
        const double vs_Q = varsigma([](const PathState& s) { return s.lambda_Q; },
                                     [](const NoiseDraw& z) { return z.z2; });
        double vs_C = 0.0, vs_H = 0.0;
        if (full) {
            vs_C = varsigma([](const PathState& s) { return s.lambda_C; },
                            [](const NoiseDraw& z) { return z.z1; });
            vs_H = varsigma([](const PathState& s) { return s.lambda_H; },
                            [](const NoiseDraw& z) { return z.z3; });
        }
        out.varsigma_Q[j] = vs_Q;

        double sens = 0.0;
        double grad = 0.0;
        for (std::size_t k = 0; k < n_paths; ++k) {
            const auto& traj = forward[k];
            auto& s = state[k];
            const double H = traj.H[j], Q = traj.Q[j], C = traj.C[j], R = traj.R[j], S = traj.S[j];
            const NoiseDraw& z = traj.noise[j];
            const double P = carbonate_ion(H, p);
            const auto d = coefficient_partials(C, H, Q, U[j], p);
            const double kvt = k_v / R;
            const double rho_t = p.rho / R;

            // control sensitivity uses lambda^{j+1}
            sens += s.lambda_Q - s.lambda_C;
            grad += (s.lambda_Q - s.lambda_C) * p.K_sp * P * Q;

            double gamma_Q = -s.lambda_Q * (d.dr_dQ + kvt) + s.lambda_C * d.dr_dQ
                             - w * c_j * (Q - Q_target[j]) + p.sigma_Q * vs_Q;
            double new_Q = s.lambda_Q + tau * gamma_Q - sq * vs_Q * z.z2;

            if (full) {
                const PsdField& F = traj.psd_history[j];
                const double a = growth_rate(C, H, p);
                const double N = nucleation_rate(C, H, p);
                lw_rate_d_speed(F, dG, a, tau, grid.h);
                double coupling_C = 0.0, coupling_H = 0.0;
                for (std::size_t i = 0; i < F.size(); ++i) {
                    coupling_C += s.lambda_F[i] * (d.da_dC * dG[i] + d.dN_dC * F[i]);
                    coupling_H += s.lambda_F[i] * (d.da_dH * dG[i] + d.dN_dH * F[i]);
                }
                double gamma_C = s.lambda_C * (-kvt - rho_t * (S * d.da_dC + v_nuc * d.dN_dC))
                                 + coupling_C + p.sigma_C * vs_C;
                double gamma_H = -s.lambda_Q * d.dr_dH
                                 + s.lambda_C * (d.dr_dH - rho_t * (S * d.da_dH + v_nuc * d.dN_dH))
                                 + coupling_H + p.sigma_H * vs_H;
                lw_step_transpose(s.lambda_F, next_F, a, N, tau, grid.h);
                const std::size_t M = F.size() - 1;
                for (std::size_t i = 0; i <= M; ++i) {
                    double x = grid.x(i);
                    double dS = grid.h * ((i == 0 || i == M) ? 0.5 : 1.0) * x * x;
                    next_F[i] -= tau * rho_t * a * dS * s.lambda_C;
                }
                s.lambda_F.swap(next_F);
                s.lambda_C = s.lambda_C + tau * gamma_C - sq * vs_C * z.z1;
                s.lambda_H = s.lambda_H + tau * gamma_H - sq * vs_H * z.z3;
            }
            s.lambda_Q = new_Q;
            if (!std::isfinite(s.lambda_Q) || !std::isfinite(s.lambda_C) || !std::isfinite(s.lambda_H))
                throw NumericalError("non-finite adjoint at step " + std::to_string(j));
        }
        out.control_adjoint[j] = sens * inv_paths;
        out.gradient[j] = tau * (sweep.alpha * c_j * (U[j] - U_ref[j]) + grad * inv_paths);
        store_means(j);
    }
    if (full) {
        for (const auto& s : state) {
            for (double v : s.lambda_F)
                out.lambda_F_max_abs = std::max(out.lambda_F_max_abs, std::abs(v));
        }
    }
    return out;
}

std::vector<double> update_ur(std::span<const double> U, std::span<const double> control_adjoint,
                              std::span<const double> U_ref, const SweepConfig& sweep)
{
    if (control_adjoint.size() != U.size() || (!U_ref.empty() && U_ref.size() != U.size()))
        throw DataError("control update inputs are not on a common grid", ErrorCode::GridMismatch);
    std::vector<double> next(U.size());
    for (std::size_t j = 0; j < U.size(); ++j) {
        double ref = U_ref.empty() ? 0.0 : U_ref[j];
        double u = U[j] - sweep.eta_tilde * (U[j] - ref) - sweep.eta_hat * control_adjoint[j];
        if (sweep.project)
            u = std::clamp(u, sweep.u_min, sweep.u_max);
        next[j] = u;
    }
    return next;
}

namespace {

std::vector<double> or_zeros(const std::vector<double>& v, std::size_t n)
{
    return v.empty() ? std::vector<double>(n, 0.0) : v;
}

RunConfig forward_config(const FbssmProblem& problem, std::span<const double> U,
                         const SweepConfig& sweep)
{
    RunConfig run = problem.base;
    if (U.size() != run.grid.n_t + 1)
        throw DataError("control is not on the run grid", ErrorCode::GridMismatch);
    run.controls.U_r.assign(U.begin(), U.end());
    run.record_every = 1;
    run.record_noise = true;
    run.record_psd = sweep.full_adjoint;
    run.psd_snapshot_times.clear();
    run.u_min = std::min(run.u_min, sweep.u_min);
    run.u_max = std::max(run.u_max, sweep.u_max);
    return run;
}

}  // namespace

std::vector<Trajectory> fbssm_forward(const FbssmProblem& problem, std::span<const double> U,
                                      const SweepConfig& sweep)
{
    return simulate(forward_config(problem, U, sweep), sweep.workers);
}

double fbssm_cost(const FbssmProblem& problem, const std::vector<Trajectory>& forward,
                  std::span<const double> U, const SweepConfig& sweep)
{
    const std::size_t n = problem.base.grid.n_t + 1;
    auto U_ref = or_zeros(problem.U_ref, n);
    return cost_J(forward, problem.Q_target, U, U_ref, sweep.alpha, problem.base.grid.tau,
                  sweep.tracking_weight);
}

GradientEvaluation fbssm_gradient(const FbssmProblem& problem, std::span<const double> U,
                                  const SweepConfig& sweep)
{
    const std::size_t n = problem.base.grid.n_t + 1;
    auto U_ref = or_zeros(problem.U_ref, n);
    RunConfig run = forward_config(problem, U, sweep);
    auto forward = simulate(run, sweep.workers);
    GradientEvaluation out;
    out.J = cost_J(forward, problem.Q_target, U, U_ref, sweep.alpha, run.grid.tau,
                   sweep.tracking_weight);
    out.adjoint = backward_sweep(run, forward, problem.Q_target, U_ref, sweep);
    return out;
}

FbssmResult fbssm_run(const FbssmProblem& problem, const SweepConfig& sweep,
                      const FbssmObserver& observer)
{
    sweep.validate();
    const std::size_t n = problem.base.grid.n_t + 1;
    if (problem.Q_target.size() != n)
        throw DataError("target trace is not on the run grid", ErrorCode::GridMismatch);
    const auto U_ref = or_zeros(problem.U_ref, n);
    std::vector<double> U = or_zeros(problem.U_init, n);
    if (U.size() != n || U_ref.size() != n)
        throw DataError("control arrays are not on the run grid", ErrorCode::GridMismatch);

    FbssmResult result;
    std::vector<Trajectory> forward;
    for (std::size_t k = 0;; ++k) {
        RunConfig run = forward_config(problem, U, sweep);
        forward = simulate(run, sweep.workers);
        double J = cost_J(forward, problem.Q_target, U, U_ref, sweep.alpha, run.grid.tau,
                          sweep.tracking_weight);
        result.J_history.push_back(J);
        if (observer)
            observer(k, J);
        if (k > 0 && sweep.tol_J > 0.0) {
            double prev = result.J_history[k - 1];
            if (prev > 0.0 && (prev - J) / prev < sweep.tol_J) {
                result.converged = true;
                break;
            }
        }
        if (k == sweep.max_iters)
            break;
        auto adjoint = backward_sweep(run, forward, problem.Q_target, U_ref, sweep);
        U = update_ur(U, adjoint.control_adjoint, U_ref, sweep);
        result.iterations = k + 1;
    }
    result.U = U;
    result.Q_mean.assign(n, 0.0);
    for (const auto& traj : forward) {
        for (std::size_t j = 0; j < n; ++j)
            result.Q_mean[j] += traj.Q[j] / static_cast<double>(forward.size());
    }
    result.fitted = forward.front();
    return result;
}

}  // namespace phswing
