#include "phswing/verify.hpp"
#include "phswing/coefficients.hpp"
#include "phswing/csv.hpp"
#include "phswing/error.hpp"
#include "phswing/kinetics.hpp"
#include "phswing/oracles.hpp"
#include "phswing/psd_transport.hpp"
#include "phswing/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <sstream>

namespace phswing {

VerifyProfile parse_verify_profile(std::string_view name)
{
    if (name == "default")
        return VerifyProfile::Default;
    if (name == "coarse")
        return VerifyProfile::Coarse;
    throw ConfigError("unknown verification profile '" + std::string(name) + "'");
}

double convergence_order(const std::vector<double>& steps, const std::vector<double>& errors)
{
    const std::size_t n = steps.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(steps[i]);
        my += std::log(errors[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = std::log(steps[i]) - mx;
        sxy += dx * (std::log(errors[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

constexpr double kBumpCenter = 3.0;
constexpr double kBumpWidth = 0.6;

double bump(double x)
{
    double z = (x - kBumpCenter) / kBumpWidth;
    return std::exp(-0.5 * z * z);
}

// Frozen-coefficient model point: C at twice saturation gives supersaturation 1.
ModelParams frozen_params()
{
    ModelParams p;
    p.k_N = 0.05;
    p.delta = 1.0;
    return p;
}

struct FrozenCoefficients {
    double a;
    double N;
};

FrozenCoefficients frozen_coefficients(const ModelParams& p)
{
    const double H = 8.0;
    const double C = 2.0 * c_sat(H, p);
    return {growth_rate(C, H, p), nucleation_rate(C, H, p)};
}

PsdField evolve(const Grid& grid, double a, double N, double speed_sign)
{
    PsdField F(grid.nodes());
    for (std::size_t i = 1; i < F.size(); ++i)
        F[i] = bump(grid.x(i));
    for (std::size_t j = 0; j < grid.n_t; ++j)
        F = psd_step(F, speed_sign * a, N, grid);
    return F;
}

template <class Fn>
CheckResult guarded(const std::string& name, Fn&& fn)
{
    try {
        return fn();
    } catch (const std::exception& e) {
        return CheckResult{name, false, 0.0, std::string("error: ") + e.what()};
    }
}

std::string join_errors(const std::vector<double>& errors)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < errors.size(); ++i)
        os << (i ? " " : "") << csv::format(errors[i]);
    return os.str();
}

}  // namespace

CheckResult check_transport_order(const VerifyOptions& options)
{
    return guarded("transport_semigroup_order", [&] {
        const ModelParams p = frozen_params();
        const auto coef = frozen_coefficients(p);
        const double T = 2.0;
        const double length = 10.0;
        std::vector<std::size_t> cells = options.profile == VerifyProfile::Coarse
                                             ? std::vector<std::size_t>{32, 64, 128}
                                             : std::vector<std::size_t>{64, 128, 256};
        std::vector<double> hs, errors;
        for (std::size_t n_x : cells) {
            double h = length / static_cast<double>(n_x);
            // tau proportional to h
            std::size_t n_t = static_cast<std::size_t>(std::llround(T / (0.5 * h)));
            Grid grid = make_grid(T / static_cast<double>(n_t), n_t, length, n_x, p.k_g);
            PsdField F = evolve(grid, coef.a, coef.N, options.speed_sign);
            double err = 0.0;
            for (std::size_t i = 0; i < F.size(); ++i) {
                double exact = oracles::semigroup_psd(bump, coef.a * T, coef.N * T, grid.x(i));
                err = std::max(err, std::abs(F[i] - exact));
            }
            hs.push_back(h);
            errors.push_back(err);
        }
        double order = convergence_order(hs, errors);
        return CheckResult{"transport_semigroup_order", order >= 1.8, order,
                           "sup errors " + join_errors(errors)};
    });
}

namespace {

struct MomentRun {
    std::vector<double> numeric;
    std::vector<double> closed;
    std::vector<double> bound;
};

MomentRun moment_run(const VerifyOptions& options)
{
    const ModelParams p = frozen_params();
    const auto coef = frozen_coefficients(p);
    const double T = options.profile == VerifyProfile::Coarse ? 4.0 : 5.0;
    const double tau = 0.01;
    const auto n_t = static_cast<std::size_t>(std::llround(T / tau));
    Grid grid = make_grid(tau, n_t, 10.0, 64, p.k_g);
    PsdField F0(grid.nodes());
    for (std::size_t i = 1; i < F0.size(); ++i)
        F0[i] = bump(grid.x(i));
    std::vector<double> ups0;
    for (int n = 0; n <= 2; ++n)
        ups0.push_back(psd_moment(F0, n, grid.h));
    PsdField F = evolve(grid, coef.a, coef.N, options.speed_sign);
    std::vector<double> a_path(n_t + 1, coef.a), N_path(n_t + 1, coef.N);
    MomentRun out;
    for (int n = 0; n <= 2; ++n) {
        out.numeric.push_back(psd_moment(F, n, grid.h));
        out.closed.push_back(oracles::closed_form_moment(n, ups0, a_path, N_path, tau));
        out.bound.push_back(oracles::moment_bound(n, ups0[0], grid.length, p.k_g, p.k_N, T));
    }
    return out;
}

}  // namespace

CheckResult check_moment_closed_form(const VerifyOptions& options)
{
    return guarded("moment_closed_form", [&] {
        auto run = moment_run(options);
        double worst = 0.0;
        for (std::size_t n = 0; n < run.numeric.size(); ++n)
            worst = std::max(worst, std::abs(run.numeric[n] - run.closed[n]) / std::abs(run.closed[n]));
        return CheckResult{"moment_closed_form", worst < 0.01, worst,
                           "max relative deviation for n = 0, 1, 2"};
    });
}

CheckResult check_moment_bound(const VerifyOptions& options)
{
    return guarded("moment_bound", [&] {
        auto run = moment_run(options);
        double worst = 0.0;
        for (std::size_t n = 0; n < run.numeric.size(); ++n)
            worst = std::max(worst, run.numeric[n] / run.bound[n]);
        return CheckResult{"moment_bound", worst <= 1.0, worst, "max moment / bound"};
    });
}

CheckResult check_gbm_moments(const VerifyOptions& options)
{
    return guarded("gbm_moment_identities", [&] {
        const std::size_t M = options.paths;
        const double T = 1.0;
        struct Case {
            const char* name;
            double rate;
            double sigma;
        };
        const Case cases[] = {{"Q", 0.8, 0.3}, {"C", 0.05, 0.4}, {"H", 0.0, 0.25}};
        double worst = 0.0;
        std::ostringstream detail;
        for (std::size_t c = 0; c < 3; ++c) {
            double s1 = 0.0, s2 = 0.0, s4 = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                double W = std::sqrt(T) * counter_normal(options.seed, m, 0, 100 + c);
                double psi = oracles::gbm_propagator(cases[c].rate * T, cases[c].sigma, T, W);
                s1 += psi;
                s2 += psi * psi;
                s4 += psi * psi * psi * psi;
            }
            double n = static_cast<double>(M);
            double mean = s1 / n, mean2 = s2 / n;
            double se1 = std::sqrt((mean2 - mean * mean) / n);
            double se2 = std::sqrt((s4 / n - mean2 * mean2) / n);
            double z1 = std::abs(mean - oracles::gbm_mean(cases[c].rate * T)) / se1;
            double z2 = std::abs(mean2 - oracles::gbm_even_moment(1, cases[c].rate * T,
                                                                  cases[c].sigma, T)) / se2;
            worst = std::max({worst, z1, z2});
            detail << cases[c].name << ": " << csv::format(z1) << "/" << csv::format(z2) << " SE; ";
        }
        return CheckResult{"gbm_moment_identities", worst < 3.0, worst, detail.str()};
    });
}

namespace {

// Fine Brownian increments shared across refinement levels.
struct EmStudy {
    std::vector<double> strong;
    std::vector<double> weak;
    std::vector<double> steps;
};

// Runs the kinetics EM step on a pure GBM subproblem: `which` = 0 drives the pH
// equation (sigma_H, no drift), 1 drives the calcium equation (decay rate, sigma_Q).
EmStudy em_study(const VerifyOptions& options, int which, double rate, double sigma)
{
    const double T = 1.0;
    const std::size_t levels = 4;
    const std::size_t base = options.profile == VerifyProfile::Coarse ? 8 : 16;
    const std::size_t finest = base << (levels - 1);
    const double tau_f = T / static_cast<double>(finest);

    ModelParams p;
    p.sigma_C = 0.0;
    p.sigma_H = which == 0 ? sigma : 0.0;
    p.sigma_Q = which == 1 ? sigma : 0.0;
    p.R_dot = 0.0;
    const double H = 8.0;
    const double U_r = 1.0;
    // scale K_sp so that the calcium decay rate K_sp P(H) U_r equals `rate`
    p.K_sp = rate > 0.0 ? rate / (carbonate_ion(H, p) * U_r) : p.K_sp;

    EmStudy out;
    std::vector<double> strong(levels, 0.0), weak(levels, 0.0);
    std::vector<double> dW(finest);
    for (std::size_t m = 0; m < options.paths; ++m) {
        double W = 0.0;
        for (std::size_t k = 0; k < finest; ++k) {
            dW[k] = std::sqrt(tau_f) * counter_normal(options.seed, m, k, 200 + which);
            W += dW[k];
        }
        const double x0 = which == 0 ? H : 1.0;
        const double exact = x0 * oracles::gbm_propagator(which == 0 ? 0.0 : rate * T, sigma, T, W);
        for (std::size_t level = 0; level < levels; ++level) {
            const std::size_t steps = base << level;
            const std::size_t ratio = finest / steps;
            const double tau = T / static_cast<double>(steps);
            KineticState s{H, which == 1 ? 1.0 : 0.0, 0.0, p.R0};
            for (std::size_t j = 0; j < steps; ++j) {
                double inc = 0.0;
                for (std::size_t k = 0; k < ratio; ++k)
                    inc += dW[j * ratio + k];
                NoiseDraw z;
                (which == 0 ? z.z3 : z.z2) = inc / std::sqrt(tau);
                s = em_step(s, 0.0, 0.0, which == 1 ? U_r : 0.0, 0.0, z, p, tau);
                if (which == 1)
                    s.H = H;  // keep the decay rate frozen
            }
            double x = which == 0 ? s.H : s.Q;
            strong[level] += std::abs(x - exact);
            weak[level] += x - exact;
        }
    }
    for (std::size_t level = 0; level < levels; ++level) {
        out.steps.push_back(T / static_cast<double>(base << level));
        out.strong.push_back(strong[level] / static_cast<double>(options.paths));
        out.weak.push_back(std::abs(weak[level]) / static_cast<double>(options.paths));
    }
    return out;
}

}  // namespace

CheckResult check_em_strong_order(const VerifyOptions& options)
{
    return guarded("em_strong_order", [&] {
        auto study = em_study(options, 0, 0.0, 0.5);
        double order = convergence_order(study.steps, study.strong);
        return CheckResult{"em_strong_order", std::abs(order - 0.5) <= 0.1, order,
                           "mean |X_EM - X| " + join_errors(study.strong)};
    });
}

CheckResult check_em_weak_order(const VerifyOptions& options)
{
    return guarded("em_weak_order", [&] {
        auto study = em_study(options, 1, 2.0, 0.2);
        double order = convergence_order(study.steps, study.weak);
        return CheckResult{"em_weak_order", std::abs(order - 1.0) <= 0.2, order,
                           "|mean(X_EM - X)| " + join_errors(study.weak)};
    });
}

CheckResult check_analytic_ph(const VerifyOptions& options)
{
    return guarded("analytic_ph_mean", [&] {
        // E[H_T] = H0 + int k_H U_H for the Duhamel solution with multiplicative noise
        const double T = 1.0, H0 = 7.0, sigma = 0.2, k_H = 1.0;
        const std::size_t n = 64;
        const double tau = T / static_cast<double>(n);
        std::vector<double> U(n + 1), W(n + 1, 0.0);
        for (std::size_t j = 0; j <= n; ++j)
            U[j] = 0.5 * std::sin(3.0 * tau * static_cast<double>(j));
        double expected = H0 + k_H * oracles::cumulative_trapezoid(U, tau).back();
        double s1 = 0.0, s2 = 0.0;
        const std::size_t M = std::max<std::size_t>(options.paths / 4, 1000);
        for (std::size_t m = 0; m < M; ++m) {
            for (std::size_t j = 1; j <= n; ++j)
                W[j] = W[j - 1] + std::sqrt(tau) * counter_normal(options.seed, m, j, 300);
            double H = oracles::analytic_H(H0, U, k_H, sigma, W, tau);
            s1 += H;
            s2 += H * H;
        }
        double mean = s1 / static_cast<double>(M);
        double se = std::sqrt((s2 / static_cast<double>(M) - mean * mean) / static_cast<double>(M));
        double z = std::abs(mean - expected) / se;
        return CheckResult{"analytic_ph_mean", z < 3.0, z, "standard errors from H0 + int U_H"};
    });
}

std::vector<CheckResult> run_oracle_battery(const VerifyOptions& options)
{
    return {
        check_transport_order(options),
        check_moment_closed_form(options),
        check_moment_bound(options),
        check_gbm_moments(options),
        check_em_strong_order(options),
        check_em_weak_order(options),
        check_analytic_ph(options),
    };
}

}  // namespace phswing
