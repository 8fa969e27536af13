#include "phswing/oracles.hpp"
#include "phswing/coefficients.hpp"

#include <cmath>

namespace phswing::oracles {

std::vector<double> cumulative_trapezoid(std::span<const double> samples, double tau)
{
    std::vector<double> out(samples.size(), 0.0);
    for (std::size_t j = 1; j < samples.size(); ++j)
        out[j] = out[j - 1] + 0.5 * tau * (samples[j - 1] + samples[j]);
    return out;
}

double semigroup_psd(const std::function<double(double)>& F0, double int_a, double int_N,
                     double x)
{
    double origin = x - int_a;
    if (origin < 0.0)
        return 0.0;
    return std::exp(int_N) * F0(origin);
}

double semigroup_psd(const std::function<double(double)>& F0, std::span<const double> a_path,
                     std::span<const double> N_path, double tau, double x)
{
    double int_a = a_path.empty() ? 0.0 : cumulative_trapezoid(a_path, tau).back();
    double int_N = N_path.empty() ? 0.0 : cumulative_trapezoid(N_path, tau).back();
    return semigroup_psd(F0, int_a, int_N, x);
}

std::vector<double> nested_growth_integrals(std::span<const double> a_path, double tau, int order)
{
    std::vector<double> finals(static_cast<std::size_t>(order) + 1, 0.0);
    std::vector<double> A(a_path.size(), 1.0);
    finals[0] = 1.0;
    std::vector<double> integrand(a_path.size());
    for (int k = 1; k <= order; ++k) {
        for (std::size_t j = 0; j < a_path.size(); ++j)
            integrand[j] = a_path[j] * A[j];
        A = cumulative_trapezoid(integrand, tau);
        finals[static_cast<std::size_t>(k)] = A.empty() ? 0.0 : A.back();
    }
    return finals;
}

double closed_form_moment(int n, std::span<const double> upsilon0, std::span<const double> a_path,
                          std::span<const double> N_path, double tau)
{
    auto A = nested_growth_integrals(a_path, tau, n);
    double int_N = N_path.empty() ? 0.0 : cumulative_trapezoid(N_path, tau).back();
    double sum = 0.0;
    double factor = 1.0;  // n!/k!, built downward from k = n
    for (int k = n; k >= 0; --k) {
        sum += factor * upsilon0[static_cast<std::size_t>(k)] * A[static_cast<std::size_t>(n - k)];
        factor *= k;
    }
    return std::exp(int_N) * sum;
}

double moment_bound(int n, double upsilon00, double k_upsilon, double k_a, double k_N, double t)
{
    return upsilon00 * std::exp(k_N * t) * std::pow(k_upsilon + k_a * t, n);
}

double gbm_rate_Q(double H, double U_r, double k_v, double R, const ModelParams& p)
{
    return p.K_sp * carbonate_ion(H, p) * U_r + k_v / R;
}

double gbm_rate_C(double k_v, double R)
{
    return k_v / R;
}

double gbm_propagator(double int_rate, double sigma, double dt, double dW)
{
    return std::exp(-int_rate - 0.5 * sigma * sigma * dt + sigma * dW);
}

double gbm_mean(double int_rate)
{
    return std::exp(-int_rate);
}

double gbm_even_moment(int p, double int_rate, double sigma, double dt)
{
    double q = static_cast<double>(p);
    return std::exp(q * (2.0 * q - 1.0) * sigma * sigma * dt - 2.0 * q * int_rate);
}

double analytic_H(double H0, std::span<const double> U_H, double k_H, double sigma,
                  std::span<const double> W, double tau)
{
    const std::size_t n = W.size() - 1;
    const double T = tau * static_cast<double>(n);
    const double WT = W[n];
    double integral = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        double s = tau * static_cast<double>(j);
        double psi = std::exp(-0.5 * sigma * sigma * (T - s) + sigma * (WT - W[j]));
        double w = (j == 0 || j == n) ? 0.5 : 1.0;
        integral += w * psi * k_H * U_H[j];
    }
    integral *= tau;
    return gbm_propagator(0.0, sigma, T, WT) * H0 + integral;
}

double ou_exact_step(double x, double theta, double mu, double sigma, double dt, double z)
{
    double decay = std::exp(-theta * dt);
    return x * decay + mu * (1.0 - decay) + std::sqrt(ou_variance(theta, sigma, dt)) * z;
}

double ou_mean(double x0, double theta, double mu, double t)
{
    double decay = std::exp(-theta * t);
    return x0 * decay + mu * (1.0 - decay);
}

double ou_variance(double theta, double sigma, double t)
{
    if (theta == 0.0)
        return sigma * sigma * t;
    return sigma * sigma * (1.0 - std::exp(-2.0 * theta * t)) / (2.0 * theta);
}

double exp_ou(double x0, double theta, double sigma, std::span<const double> mu,
              std::span<const double> W, double tau)
{
    const std::size_t n = W.size() - 1;
    const double sigma_x = theta + 0.5 * sigma * sigma;
    double integral = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        double s = tau * static_cast<double>(j);
        double w = (j == 0 || j == n) ? 0.5 : 1.0;
        integral += w * std::exp(s * sigma_x - sigma * W[j]) * mu[j];
    }
    integral *= tau;
    double T = tau * static_cast<double>(n);
    return std::exp(-T * sigma_x + sigma * W[n]) * (x0 + integral);
}

}  // namespace phswing::oracles
