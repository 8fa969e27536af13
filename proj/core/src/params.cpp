#include "phswing/params.hpp"
#include "phswing/config.hpp"
#include "phswing/csv.hpp"
#include "phswing/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

namespace phswing {

namespace {

struct Field {
    const char* name;
    double ModelParams::*member;
};

constexpr std::array kFields{
    Field{"K_sp", &ModelParams::K_sp},
    Field{"K_a1", &ModelParams::K_a1},
    Field{"K_a2", &ModelParams::K_a2},
    Field{"K_co2", &ModelParams::K_co2},
    Field{"Kco2_tilde", &ModelParams::Kco2_tilde},
    Field{"Ka1_tilde", &ModelParams::Ka1_tilde},
    Field{"Ka2_tilde", &ModelParams::Ka2_tilde},
    Field{"Ka3_tilde", &ModelParams::Ka3_tilde},
    Field{"K1_sat", &ModelParams::K1_sat},
    Field{"K2_sat", &ModelParams::K2_sat},
    Field{"k_g", &ModelParams::k_g},
    Field{"p_exp", &ModelParams::p_exp},
    Field{"k_N", &ModelParams::k_N},
    Field{"delta", &ModelParams::delta},
    Field{"n_exp", &ModelParams::n_exp},
    Field{"d", &ModelParams::d},
    Field{"rho", &ModelParams::rho},
    Field{"k_H", &ModelParams::k_H},
    Field{"R_dot", &ModelParams::R_dot},
    Field{"sigma_C", &ModelParams::sigma_C},
    Field{"sigma_Q", &ModelParams::sigma_Q},
    Field{"sigma_H", &ModelParams::sigma_H},
    Field{"H0", &ModelParams::H0},
    Field{"Q0", &ModelParams::Q0},
    Field{"C0", &ModelParams::C0},
    Field{"R0", &ModelParams::R0},
};

void require(bool ok, const char* name, const char* rule, double value)
{
    if (!ok) {
        throw ConfigError(std::string("parameter ") + name + " must be " + rule + " (got "
                          + csv::format(value) + ")");
    }
}

}  // namespace

double ModelParams::v_nuc() const
{
    return std::numbers::pi / 6.0 * d * d * d;
}

void ModelParams::validate() const
{
    for (const auto& field : kFields) {
        double value = this->*field.member;
        require(std::isfinite(value), field.name, "finite", value);
    }
    require(K_sp > 0, "K_sp", "positive", K_sp);
    require(K_a1 > 0, "K_a1", "positive", K_a1);
    require(K_a2 > 0, "K_a2", "positive", K_a2);
    require(K_co2 > 0, "K_co2", "positive", K_co2);
    require(Kco2_tilde > 0, "Kco2_tilde", "positive", Kco2_tilde);
    require(Ka1_tilde > 0, "Ka1_tilde", "positive", Ka1_tilde);
    require(K1_sat > 0, "K1_sat", "positive", K1_sat);
    require(K2_sat >= 0, "K2_sat", "non-negative", K2_sat);
    require(k_g >= 0, "k_g", "non-negative", k_g);
    require(p_exp > 0, "p_exp", "positive", p_exp);
    require(k_N >= 0, "k_N", "non-negative", k_N);
    require(delta >= 0, "delta", "non-negative", delta);
    require(n_exp > 0, "n_exp", "positive", n_exp);
    require(d >= 0, "d", "non-negative", d);
    require(rho >= 0, "rho", "non-negative", rho);
    require(R_dot >= 0, "R_dot", "non-negative", R_dot);
    require(sigma_C >= 0, "sigma_C", "non-negative", sigma_C);
    require(sigma_Q >= 0, "sigma_Q", "non-negative", sigma_Q);
    require(sigma_H >= 0, "sigma_H", "non-negative", sigma_H);
    require(Q0 >= 0, "Q0", "non-negative", Q0);
    require(C0 >= 0, "C0", "non-negative", C0);
    require(R0 > 0, "R0", "positive", R0);
}

ParamPreset parse_preset(std::string_view name)
{
    if (name == "table")
        return ParamPreset::Table;
    if (name == "inline")
        return ParamPreset::Inline;
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected table or inline)");
}

std::string_view preset_name(ParamPreset preset)
{
    return preset == ParamPreset::Table ? "table" : "inline";
}

ModelParams preset_params(ParamPreset preset)
{
    ModelParams params;
    if (preset == ParamPreset::Inline) {
        params.K1_sat = 0.01;
        params.K_sp = 4.8e-9;
    }
    return params;
}

ModelParams take_params(KeyValueConfig& config, ModelParams base)
{
    ModelParams params = base;
    if (auto preset = config.take("preset"))
        params = preset_params(parse_preset(*preset));
    for (const auto& field : kFields) {
        if (auto value = config.take_double(field.name))
            params.*field.member = *value;
    }
    params.validate();
    return params;
}

void write_params(std::ostream& out, const ModelParams& params)
{
    for (const auto& field : kFields)
        out << field.name << " = " << csv::format(params.*field.member) << '\n';
}

}  // namespace phswing
