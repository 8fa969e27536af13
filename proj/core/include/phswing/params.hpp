#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace phswing {

class KeyValueConfig;

// Physical and chemical constants of the precipitation model.
// Units: concentrations in mol/l, lengths in um, time in s, volume in l.
struct ModelParams {
    // solubility product and acid constants (reference chemistry)
    double K_sp = 2.8e-9;
    double K_a1 = 1e-6;
    double K_a2 = 1e-10;
    double K_co2 = 1e-3;

    // simplified carbonate-ion sigmoid
    double Kco2_tilde = 100.0;
    double Ka1_tilde = 0.45;
    double Ka2_tilde = 6.6;
    double Ka3_tilde = 13.5;

    // simplified saturation law
    double K1_sat = 0.05;
    double K2_sat = 1.2e6;

    // growth and nucleation
    double k_g = 0.459;
    double p_exp = 2.0;
    double k_N = 1e-3;
    double delta = 1.0;
    double n_exp = 2.0;
    double d = 1e-6;

    double rho = 0.315;
    double k_H = 1.0;
    double R_dot = 1e-2;

    // noise intensities
    double sigma_C = 0.025;
    double sigma_Q = 0.0005;
    double sigma_H = 0.001;

    // initial kinetic state
    double H0 = 7.0;
    double Q0 = 0.05;
    double C0 = 0.0;
    double R0 = 5.18;

    double v_nuc() const;
    // Throws ConfigError on the first constant outside its admissible range.
    void validate() const;
};

enum class ParamPreset { Table, Inline };

ParamPreset parse_preset(std::string_view name);
std::string_view preset_name(ParamPreset preset);
ModelParams preset_params(ParamPreset preset);

// Applies "preset" and any ModelParams keys found in the config (consuming them).
ModelParams take_params(KeyValueConfig& config, ModelParams base = {});

void write_params(std::ostream& out, const ModelParams& params);

}  // namespace phswing
