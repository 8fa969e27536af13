#pragma once

#include "phswing/controls.hpp"

#include <span>
#include <vector>

namespace phswing {

// U_r = clamp(k_rc U_H, k_minus_uc, k_plus_uc).
struct ManualFitParams {
    double k_rc = 0.0;
    double k_minus_uc = 0.0;
    double k_plus_uc = 0.0;

    void validate() const;
};

// Hand-tuned constants for experiments 1..4; throws ConfigError otherwise.
ManualFitParams manual_preset(int experiment);

double manual_ur(double U_H, const ManualFitParams& kappa);
std::vector<double> manual_ur(std::span<const double> U_H, const ManualFitParams& kappa);

// Replaces U_r of a control signal with the manual law applied to its U_H.
ControlSignal apply_manual_law(const ControlSignal& controls, const ManualFitParams& kappa);

}  // namespace phswing
