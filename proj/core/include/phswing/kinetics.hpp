#pragma once

#include "phswing/params.hpp"

#include <cstddef>

namespace phswing {

struct KineticState {
    double H = 0.0;
    double Q = 0.0;
    double C = 0.0;
    double R = 0.0;
};

// Independent standard normals for the C, Q and H equations.
struct NoiseDraw {
    double z1 = 0.0;
    double z2 = 0.0;
    double z3 = 0.0;
};

struct KineticDrift {
    double dH = 0.0;
    double dQ = 0.0;
    double dC = 0.0;
    double dR = 0.0;
};

struct EmDiagnostics {
    std::size_t clip_Q = 0;
    std::size_t clip_C = 0;
};

// Inflow rate k_v(t): R_dot while dosing, zero otherwise.
inline double inflow_rate(bool dosing, const ModelParams& p)
{
    return dosing ? p.R_dot : 0.0;
}

KineticDrift drift(const KineticState& s, double S, double U_H, double U_r, double k_v,
                   const ModelParams& p);

// Euler-Maruyama step with multiplicative noise; negative Q or C are clipped to
// zero and counted in diag.
KineticState em_step(const KineticState& s, double S, double U_H, double U_r, double k_v,
                     const NoiseDraw& z, const ModelParams& p, double tau,
                     EmDiagnostics* diag = nullptr);

}  // namespace phswing
