#pragma once

#include "phswing/params.hpp"

namespace phswing {

// Simplified carbonate-ion concentration P(H), a sigmoid in pH bounded by Kco2_tilde.
double carbonate_ion(double H, const ModelParams& p);
double carbonate_ion_dH(double H, const ModelParams& p);

// Simplified saturation concentration C_sat(H).
double c_sat(double H, const ModelParams& p);
double c_sat_dH(double H, const ModelParams& p);

// Relative supersaturation max(C / C_sat(H) - 1, 0).
double supersat(double C, double H, const ModelParams& p);

double growth_rate(double C, double H, const ModelParams& p);
double nucleation_rate(double C, double H, const ModelParams& p);

// Dissolution rate r = K_sp Q P(H) U_r.
double reaction_rate(double Q, double H, double U_r, const ModelParams& p);

// Precipitation sink (rho / R) (a S + v_nuc N).
double sink_term(double C, double H, double S, double R, const ModelParams& p);

struct CoefficientPartials {
    double da_dC = 0.0;
    double da_dH = 0.0;
    double dN_dC = 0.0;
    double dN_dH = 0.0;
    double dr_dQ = 0.0;
    double dr_dH = 0.0;
};

CoefficientPartials coefficient_partials(double C, double H, double Q, double U_r,
                                         const ModelParams& p);

// Full carbonate speciation, used to compare against the simplified laws.
double reference_carbonate_ion(double H, const ModelParams& p);
double reference_c_sat(double H, const ModelParams& p);

}  // namespace phswing
