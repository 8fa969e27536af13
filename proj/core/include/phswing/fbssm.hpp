#pragma once

#include "phswing/simulator.hpp"

#include <functional>
#include <span>
#include <vector>

namespace phswing {

class KeyValueConfig;

struct SweepConfig {
    double eta_tilde = 1e-4;
    double eta_hat = 5e-3;
    double alpha = 0.1;
    std::size_t max_iters = 500;
    // stop once the relative decrease of J falls below tol_J (0 runs all iterations)
    double tol_J = 0.0;
    double tracking_weight = 1.0;
    bool project = true;
    double u_min = -1.0;
    double u_max = 1.0;
    // carry lambda_C, lambda_H and lambda_F as well as lambda_Q
    bool full_adjoint = false;
    std::size_t workers = 1;

    void validate() const;
};

SweepConfig take_sweep_config(KeyValueConfig& config);

// Adjoint ensemble means on the grid (index j = time t_j) plus derived quantities.
struct AdjointTrajectory {
    std::vector<double> lambda_Q;
    std::vector<double> lambda_C;
    std::vector<double> lambda_H;
    std::vector<double> varsigma_Q;  // per step j = 0..n_t-1
    double lambda_F_max_abs = 0.0;
    // mean (lambda_Q - lambda_C) aligned with the control: step j uses lambda^{j+1},
    // the final node uses lambda^N
    std::vector<double> control_adjoint;
    // dJ/dU_j of the discrete cost
    std::vector<double> gradient;
};

// Martingale coefficient of the backward equation from the ensemble cross-moment
// E[z lambda^{j+1}] / sqrt(tau). Zero for fewer than 2 paths or in deterministic mode.
double estimate_varsigma(std::span<const double> lambda_next, std::span<const double> z,
                         double tau, bool deterministic = false);

// Backward sweep over an ensemble recorded at every step with its noise draws.
// run supplies parameters, grid and controls (U_r = the control being evaluated).
AdjointTrajectory backward_sweep(const RunConfig& run, const std::vector<Trajectory>& forward,
                                 std::span<const double> Q_target, std::span<const double> U_ref,
                                 const SweepConfig& sweep);

// U - eta_tilde (U - Ubar) - eta_hat * adjoint, projected onto [u_min, u_max] when enabled.
std::vector<double> update_ur(std::span<const double> U, std::span<const double> control_adjoint,
                              std::span<const double> U_ref, const SweepConfig& sweep);

struct FbssmProblem {
    RunConfig base;                 // params, grid, U_H, dosing, paths, seed
    std::vector<double> Q_target;   // n_t + 1 samples
    std::vector<double> U_ref;      // Ubar; zeros when empty
    std::vector<double> U_init;     // zeros when empty
};

struct FbssmResult {
    std::vector<double> U;
    std::vector<double> J_history;  // J of every iterate, including the returned U
    std::size_t iterations = 0;
    bool converged = false;
    Trajectory fitted;              // path 0 of the last forward run
    std::vector<double> Q_mean;     // ensemble mean of Q under the returned U
};

// Forward run with U_r = U (all steps recorded, noise kept for the sweep).
std::vector<Trajectory> fbssm_forward(const FbssmProblem& problem, std::span<const double> U,
                                      const SweepConfig& sweep);
double fbssm_cost(const FbssmProblem& problem, const std::vector<Trajectory>& forward,
                  std::span<const double> U, const SweepConfig& sweep);

struct GradientEvaluation {
    double J = 0.0;
    AdjointTrajectory adjoint;
};
GradientEvaluation fbssm_gradient(const FbssmProblem& problem, std::span<const double> U,
                                  const SweepConfig& sweep);

using FbssmObserver = std::function<void(std::size_t iteration, double J)>;

FbssmResult fbssm_run(const FbssmProblem& problem, const SweepConfig& sweep,
                      const FbssmObserver& observer = {});

}  // namespace phswing
