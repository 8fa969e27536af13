#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace phswing {

// Uniform space-time grid. Nodes x_i = i h, i = 0..n_x, and times t_j = j tau, j = 0..n_t.
struct Grid {
    double tau = 0.01;
    std::size_t n_t = 0;
    double length = 10.0;
    std::size_t n_x = 64;
    double h = 10.0 / 64;
    // k_g tau / (2 h), recorded when the grid is built.
    double cfl = 0.0;

    std::size_t nodes() const { return n_x + 1; }
    double x(std::size_t i) const { return static_cast<double>(i) * h; }
    double t(std::size_t j) const { return static_cast<double>(j) * tau; }
    double t_end() const { return t(n_t); }
};

// Throws CflError when k_g tau / (2h) >= 1 and ConfigError on degenerate sizes.
Grid make_grid(double tau, std::size_t n_t, double length, std::size_t n_x, double k_g);

using PsdField = std::vector<double>;

struct PsdStepDiagnostics {
    std::size_t clipped = 0;
    // undershoots below -1e-12 before clipping
    std::size_t significant_undershoots = 0;
    double min_before_clip = 0.0;
};

// Discrete replacement of a dF/dx with speed-weighted Lax-Wendroff half states.
// Entry 0 is zero (inflow node). Throws CflError when a tau / h >= 1.
std::vector<double> lw_flux_divergence(const PsdField& F, double a, const Grid& grid);

// One explicit step of dF/dt + a dF/dx = N F with F(0) = 0 and a zero-gradient
// outflow boundary. a must satisfy 0 <= a tau / h < 1.
PsdField psd_step(const PsdField& F, double a, double N, const Grid& grid,
                  PsdStepDiagnostics* diag = nullptr);

// Allocation-free variant; scratch needs F.size() entries. Negative speeds are
// accepted here (used for reversed transport) as long as |a| tau / h < 1.
void psd_step_inplace(std::span<double> F, std::span<double> scratch, double a, double N,
                      double tau, double h, bool clip, PsdStepDiagnostics* diag = nullptr);

// The unclipped step is linear in F: F_next = A(a, N) F. These apply A, its
// transpose, and dG/da where G = -(a/h)(F_{i+1/2} - F_{i-1/2}) is the transport rate.
void lw_step_apply(std::span<const double> F, std::span<double> out, double a, double N,
                   double tau, double h);
void lw_step_transpose(std::span<const double> x, std::span<double> out, double a, double N,
                       double tau, double h);
void lw_rate_d_speed(std::span<const double> F, std::span<double> out, double a, double tau,
                     double h);

// Trapezoid approximation of the n-th moment int x^n F dx.
double psd_moment(std::span<const double> F, int n, double h);

// Gaussian bump with F(0) forced to zero.
PsdField gaussian_bump(const Grid& grid, double center, double width, double amplitude);

}  // namespace phswing
