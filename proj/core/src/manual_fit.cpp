#include "phswing/manual_fit.hpp"
#include "phswing/error.hpp"

#include <algorithm>

namespace phswing {

void ManualFitParams::validate() const
{
    if (!(k_minus_uc <= 0.0 && 0.0 <= k_plus_uc))
        throw ConfigError("manual law clamps must satisfy k_minus_uc <= 0 <= k_plus_uc");
}

ManualFitParams manual_preset(int experiment)
{
    switch (experiment) {
    case 1: return {0.175, -0.02, 0.042};
    case 2: return {0.15, -0.02, 0.06};
    case 3: return {0.19, -0.003, 0.19};
    case 4: return {0.19, -0.002, 0.09};
    default:
        throw ConfigError("unknown experiment " + std::to_string(experiment) + " (expected 1..4)");
    }
}

double manual_ur(double U_H, const ManualFitParams& kappa)
{
    double u = kappa.k_rc * U_H;
    if (u > kappa.k_plus_uc)
        return kappa.k_plus_uc;
    if (u < kappa.k_minus_uc)
        return kappa.k_minus_uc;
    return u;
}

std::vector<double> manual_ur(std::span<const double> U_H, const ManualFitParams& kappa)
{
    std::vector<double> out(U_H.size());
    std::transform(U_H.begin(), U_H.end(), out.begin(),
                   [&](double u) { return manual_ur(u, kappa); });
    return out;
}

ControlSignal apply_manual_law(const ControlSignal& controls, const ManualFitParams& kappa)
{
    ControlSignal out = controls;
    out.U_r = manual_ur(controls.U_H, kappa);
    return out;
}

}  // namespace phswing
