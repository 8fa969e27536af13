#include "phswing/coefficients.hpp"
#include "phswing/error.hpp"

#include <cmath>

namespace phswing {

namespace {

double logistic(double g)
{
    if (g >= 0.0)
        return 1.0 / (1.0 + std::exp(-g));
    double e = std::exp(g);
    return e / (1.0 + e);
}

double sigmoid_argument(double H, const ModelParams& p)
{
    return p.Ka1_tilde * (H - p.Ka2_tilde) * (H + p.Ka3_tilde);
}

void require_finite(double value, const char* what)
{
    if (!std::isfinite(value))
        throw DomainError(std::string(what) + " must be finite");
}

void require_ksp(const ModelParams& p)
{
    if (!(p.K_sp > 0.0))
        throw DomainError("K_sp must be positive");
}

}  // namespace

double carbonate_ion(double H, const ModelParams& p)
{
    require_finite(H, "pH");
    return p.Kco2_tilde * logistic(sigmoid_argument(H, p));
}

double carbonate_ion_dH(double H, const ModelParams& p)
{
    require_finite(H, "pH");
    double s = logistic(sigmoid_argument(H, p));
    double dg = p.Ka1_tilde * (2.0 * H + p.Ka3_tilde - p.Ka2_tilde);
    return p.Kco2_tilde * s * (1.0 - s) * dg;
}

double c_sat(double H, const ModelParams& p)
{
    require_ksp(p);
    double P = carbonate_ion(H, p);
    return p.K1_sat / (1.0 + p.K2_sat * std::sqrt(P / p.K_sp));
}

double c_sat_dH(double H, const ModelParams& p)
{
    require_ksp(p);
    double P = carbonate_ion(H, p);
    if (P <= 0.0)
        return 0.0;
    double root = std::sqrt(P / p.K_sp);
    double denom = 1.0 + p.K2_sat * root;
    double droot_dP = 0.5 / std::sqrt(P * p.K_sp);
    return -p.K1_sat * p.K2_sat * droot_dP * carbonate_ion_dH(H, p) / (denom * denom);
}

double supersat(double C, double H, const ModelParams& p)
{
    require_finite(C, "C");
    double s = C / c_sat(H, p) - 1.0;
    return s > 0.0 ? s : 0.0;
}

double growth_rate(double C, double H, const ModelParams& p)
{
    double s = supersat(C, H, p);
    if (s <= 0.0)
        return 0.0;
    return p.k_g * std::tanh(std::pow(s, p.p_exp));
}

double nucleation_rate(double C, double H, const ModelParams& p)
{
    double s = supersat(C, H, p);
    if (s <= 0.0)
        return 0.0;
    return p.k_N * std::exp(-p.delta / std::pow(s, p.n_exp));
}

double reaction_rate(double Q, double H, double U_r, const ModelParams& p)
{
    return p.K_sp * Q * carbonate_ion(H, p) * U_r;
}

double sink_term(double C, double H, double S, double R, const ModelParams& p)
{
    if (!(R > 0.0))
        throw DomainError("reactor volume must be positive");
    double a = growth_rate(C, H, p);
    double N = nucleation_rate(C, H, p);
    return p.rho / R * (a * S + p.v_nuc() * N);
}

CoefficientPartials coefficient_partials(double C, double H, double Q, double U_r,
                                         const ModelParams& p)
{
    CoefficientPartials out;
    double P = carbonate_ion(H, p);
    double dP = carbonate_ion_dH(H, p);
    out.dr_dQ = p.K_sp * P * U_r;
    out.dr_dH = p.K_sp * Q * dP * U_r;

    double cs = c_sat(H, p);
    double s = C / cs - 1.0;
    if (s <= 0.0)
        return out;
    double ds_dC = 1.0 / cs;
    double ds_dH = -C / (cs * cs) * c_sat_dH(H, p);

    double sp = std::pow(s, p.p_exp);
    double sech = 1.0 / std::cosh(sp);
    double da_ds = p.k_g * p.p_exp * std::pow(s, p.p_exp - 1.0) * sech * sech;
    out.da_dC = da_ds * ds_dC;
    out.da_dH = da_ds * ds_dH;

    double N = p.k_N * std::exp(-p.delta / std::pow(s, p.n_exp));
    double dN_ds = N * p.delta * p.n_exp * std::pow(s, -p.n_exp - 1.0);
    if (!std::isfinite(dN_ds))
        dN_ds = 0.0;
    out.dN_dC = dN_ds * ds_dC;
    out.dN_dH = dN_ds * ds_dH;
    return out;
}

double reference_carbonate_ion(double H, const ModelParams& p)
{
    require_finite(H, "pH");
    double h = std::pow(10.0, -H);
    double total = p.K_co2 * (1.0 + p.K_a1 / h + p.K_a1 * p.K_a2 / (h * h));
    return total * p.K_a1 * p.K_a2 / (h * h + p.K_a1 * h + p.K_a1 * p.K_a2);
}

double reference_c_sat(double H, const ModelParams& p)
{
    require_ksp(p);
    return std::sqrt(p.K_sp / reference_carbonate_ion(H, p));
}

}  // namespace phswing
