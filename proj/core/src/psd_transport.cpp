#include "phswing/psd_transport.hpp"
#include "phswing/csv.hpp"
#include "phswing/error.hpp"

#include <cmath>

namespace phswing {

namespace {
constexpr double kUndershootTolerance = 1e-12;
}

Grid make_grid(double tau, std::size_t n_t, double length, std::size_t n_x, double k_g)
{
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ConfigError("time step tau must be positive");
    if (!(length > 0.0) || !std::isfinite(length))
        throw ConfigError("PSD domain length must be positive");
    if (n_x < 4)
        throw ConfigError("PSD grid needs at least 4 cells");
    Grid grid;
    grid.tau = tau;
    grid.n_t = n_t;
    grid.length = length;
    grid.n_x = n_x;
    grid.h = length / static_cast<double>(n_x);
    grid.cfl = k_g * tau / (2.0 * grid.h);
    if (grid.cfl >= 1.0) {
        throw CflError("CFL number k_g*tau/(2h) = " + csv::format(grid.cfl) + " >= 1");
    }
    return grid;
}

void psd_step_inplace(std::span<double> F, std::span<double> scratch, double a, double N,
                      double tau, double h, bool clip, PsdStepDiagnostics* diag)
{
    const std::size_t M = F.size() - 1;
    const double nu = a * tau / h;
    if (!(std::abs(nu) < 1.0)) {
        throw CflError("transport step a*tau/h = " + csv::format(nu) + " violates |.| < 1");
    }
    // scratch[i] holds the half state F_{i+1/2}, with ghost F_{M+1} = F_M
    for (std::size_t i = 0; i < M; ++i)
        scratch[i] = 0.5 * (F[i] + F[i + 1]) - 0.5 * nu * (F[i + 1] - F[i]);
    scratch[M] = F[M];

    double min_value = 0.0;
    std::size_t clipped = 0;
    std::size_t significant = 0;
    double prev_half = scratch[0];
    for (std::size_t i = 1; i <= M; ++i) {
        double half = scratch[i];
        double D = a / h * (half - prev_half);
        prev_half = half;
        double value = F[i] + tau * (-D + N * F[i]);
        if (!std::isfinite(value))
            throw NumericalError("non-finite PSD value at node " + std::to_string(i));
        if (clip && value < 0.0) {
            min_value = std::min(min_value, value);
            if (value < -kUndershootTolerance)
                ++significant;
            ++clipped;
            value = 0.0;
        }
        F[i] = value;
    }
    F[0] = 0.0;
    if (diag) {
        diag->clipped += clipped;
        diag->significant_undershoots += significant;
        diag->min_before_clip = std::min(diag->min_before_clip, min_value);
    }
}

std::vector<double> lw_flux_divergence(const PsdField& F, double a, const Grid& grid)
{
    if (F.size() != grid.nodes())
        throw DomainError("PSD field size does not match the grid");
    if (!(a >= 0.0))
        throw DomainError("growth speed must be non-negative");
    const double nu = a * grid.tau / grid.h;
    if (!(nu < 1.0))
        throw CflError("transport step a*tau/h = " + csv::format(nu) + " violates < 1");
    const std::size_t M = F.size() - 1;
    auto half = [&](std::size_t i) {
        if (i == M)
            return F[M];
        return 0.5 * (F[i] + F[i + 1]) - 0.5 * nu * (F[i + 1] - F[i]);
    };
    std::vector<double> D(F.size(), 0.0);
    for (std::size_t i = 1; i <= M; ++i)
        D[i] = a / grid.h * (half(i) - half(i - 1));
    return D;
}

PsdField psd_step(const PsdField& F, double a, double N, const Grid& grid,
                  PsdStepDiagnostics* diag)
{
    if (F.size() != grid.nodes())
        throw DomainError("PSD field size does not match the grid");
    if (!(a >= 0.0))
        throw DomainError("growth speed must be non-negative");
    for (double v : F) {
        if (!std::isfinite(v))
            throw NumericalError("non-finite PSD input");
    }
    PsdField next = F;
    std::vector<double> scratch(F.size());
    psd_step_inplace(next, scratch, a, N, grid.tau, grid.h, true, diag);
    return next;
}

void lw_step_apply(std::span<const double> F, std::span<double> out, double a, double N,
                   double tau, double h)
{
    const std::size_t M = F.size() - 1;
    const double nu = a * tau / h;
    const double lower = 0.5 * nu * (1.0 + nu);
    const double diag = 1.0 - nu * nu + tau * N;
    const double upper = -0.5 * nu * (1.0 - nu);
    out[0] = 0.0;
    for (std::size_t i = 1; i < M; ++i)
        out[i] = lower * F[i - 1] + diag * F[i] + upper * F[i + 1];
    out[M] = lower * F[M - 1] + (1.0 - 0.5 * nu - 0.5 * nu * nu + tau * N) * F[M];
}

void lw_step_transpose(std::span<const double> x, std::span<double> out, double a, double N,
                       double tau, double h)
{
    const std::size_t M = x.size() - 1;
    const double nu = a * tau / h;
    const double lower = 0.5 * nu * (1.0 + nu);
    const double diag = 1.0 - nu * nu + tau * N;
    const double upper = -0.5 * nu * (1.0 - nu);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 1; i < M; ++i) {
        out[i - 1] += lower * x[i];
        out[i] += diag * x[i];
        out[i + 1] += upper * x[i];
    }
    out[M - 1] += lower * x[M];
    out[M] += (1.0 - 0.5 * nu - 0.5 * nu * nu + tau * N) * x[M];
}

void lw_rate_d_speed(std::span<const double> F, std::span<double> out, double a, double tau,
                     double h)
{
    const std::size_t M = F.size() - 1;
    const double nu = a * tau / h;
    auto half = [&](std::size_t k) {
        return k == M ? F[M] : 0.5 * (F[k] + F[k + 1]) - 0.5 * nu * (F[k + 1] - F[k]);
    };
    auto half_da = [&](std::size_t k) {
        return k == M ? 0.0 : -0.5 * tau / h * (F[k + 1] - F[k]);
    };
    out[0] = 0.0;
    for (std::size_t i = 1; i <= M; ++i) {
        out[i] = -(half(i) - half(i - 1)) / h - a / h * (half_da(i) - half_da(i - 1));
    }
}

double psd_moment(std::span<const double> F, int n, double h)
{
    if (F.size() < 2)
        return 0.0;
    double sum = 0.0;
    const std::size_t M = F.size() - 1;
    for (std::size_t i = 0; i <= M; ++i) {
        double x = static_cast<double>(i) * h;
        double w = (i == 0 || i == M) ? 0.5 : 1.0;
        sum += w * std::pow(x, n) * F[i];
    }
    return sum * h;
}

PsdField gaussian_bump(const Grid& grid, double center, double width, double amplitude)
{
    if (!(width > 0.0))
        throw ConfigError("PSD bump width must be positive");
    PsdField F(grid.nodes());
    for (std::size_t i = 1; i < F.size(); ++i) {
        double z = (grid.x(i) - center) / width;
        F[i] = amplitude * std::exp(-0.5 * z * z);
    }
    F[0] = 0.0;
    return F;
}

}  // namespace phswing
