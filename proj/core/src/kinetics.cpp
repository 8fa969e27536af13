#include "phswing/kinetics.hpp"
#include "phswing/coefficients.hpp"
#include "phswing/error.hpp"

#include <cmath>

namespace phswing {

KineticDrift drift(const KineticState& s, double S, double U_H, double U_r, double k_v,
                   const ModelParams& p)
{
    if (!(s.R > 0.0))
        throw DomainError("reactor volume must be positive");
    double r = reaction_rate(s.Q, s.H, U_r, p);
    double kv_tilde = k_v / s.R;
    KineticDrift out;
    out.dH = p.k_H * U_H;
    out.dQ = -r - kv_tilde * s.Q;
    out.dC = r - kv_tilde * s.C - sink_term(s.C, s.H, S, s.R, p);
    out.dR = k_v;
    return out;
}

KineticState em_step(const KineticState& s, double S, double U_H, double U_r, double k_v,
                     const NoiseDraw& z, const ModelParams& p, double tau, EmDiagnostics* diag)
{
    KineticDrift f = drift(s, S, U_H, U_r, k_v, p);
    double sq = std::sqrt(tau);
    KineticState next;
    next.H = s.H + tau * f.dH + sq * p.sigma_H * s.H * z.z3;
    next.Q = s.Q + tau * f.dQ + sq * p.sigma_Q * s.Q * z.z2;
    next.C = s.C + tau * f.dC + sq * p.sigma_C * s.C * z.z1;
    next.R = s.R + tau * f.dR;
    if (next.Q < 0.0) {
        next.Q = 0.0;
        if (diag)
            ++diag->clip_Q;
    }
    if (next.C < 0.0) {
        next.C = 0.0;
        if (diag)
            ++diag->clip_C;
    }
    if (!std::isfinite(next.H) || !std::isfinite(next.Q) || !std::isfinite(next.C)
        || !std::isfinite(next.R)) {
        throw NumericalError("non-finite kinetic state after Euler-Maruyama step");
    }
    return next;
}

}  // namespace phswing
