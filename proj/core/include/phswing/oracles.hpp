#pragma once

#include "phswing/params.hpp"

#include <functional>
#include <span>
#include <vector>

namespace phswing::oracles {

// Cumulative trapezoid integral of samples on a uniform grid; result[j] = int_0^{t_j}.
std::vector<double> cumulative_trapezoid(std::span<const double> samples, double tau);

// Exact solution of dF/dt + a(t) dF/dx = N(t) F along characteristics:
// e^{int N} F0(x - int a), zero where the characteristic starts left of the domain.
double semigroup_psd(const std::function<double(double)>& F0, double int_a, double int_N,
                     double x);

// Same, with a and N given as samples on the tau grid up to time index j.
double semigroup_psd(const std::function<double(double)>& F0, std::span<const double> a_path,
                     std::span<const double> N_path, double tau, double x);

// Nested integrals A_0 = 1, A_k(t) = int_0^t a(s) A_{k-1}(s) ds at the final sample, k = 0..order.
std::vector<double> nested_growth_integrals(std::span<const double> a_path, double tau, int order);

// Closed-form n-th moment at the final sample of a_path/N_path:
// e^{int N} sum_k n!/k! Upsilon^k_0 A_{n-k}. upsilon0 holds Upsilon^k_0 for k = 0..n.
double closed_form_moment(int n, std::span<const double> upsilon0, std::span<const double> a_path,
                          std::span<const double> N_path, double tau);

// Upper bound Upsilon^0_0 e^{k_N t} (k_upsilon + k_a t)^n for the n-th moment.
double moment_bound(int n, double upsilon00, double k_upsilon, double k_a, double k_N, double t);

// Decay rate of the linear multiplicative SDE dX = -rate X dt + sigma X dW.
double gbm_rate_Q(double H, double U_r, double k_v, double R, const ModelParams& p);
double gbm_rate_C(double k_v, double R);

// Pathwise propagator exp(-int rate - sigma^2 dt / 2 + sigma dW).
double gbm_propagator(double int_rate, double sigma, double dt, double dW);
double gbm_mean(double int_rate);
// E[Psi^{2p}] = exp(p (2p - 1) sigma^2 dt - 2p int_rate).
double gbm_even_moment(int p, double int_rate, double sigma, double dt);

// H_t = Psi_{0,t} H0 + int_0^t Psi_{s,t} k_H U_H(s) ds along one Brownian path.
// U_H and W are sampled on the tau grid (W[0] = 0); the Duhamel integral uses trapezoid.
double analytic_H(double H0, std::span<const double> U_H, double k_H, double sigma,
                  std::span<const double> W, double tau);

// Ornstein-Uhlenbeck dX = theta (mu - X) dt + sigma dW: exact transition with a standard normal z.
double ou_exact_step(double x, double theta, double mu, double sigma, double dt, double z);
double ou_mean(double x0, double theta, double mu, double t);
double ou_variance(double theta, double sigma, double t);

// Exponential OU dX = (mu(t) - theta X) dt + sigma X dW as the product of a GBM factor
// and a Duhamel integral; mu and W sampled on the tau grid.
double exp_ou(double x0, double theta, double sigma, std::span<const double> mu,
              std::span<const double> W, double tau);

}  // namespace phswing::oracles
