#pragma once

#include "phswing/psd_transport.hpp"

#include <filesystem>
#include <vector>

namespace phswing {

// Time series of the inputs: pH rate U_H, rate modulation U_r and the dosing mask
// that switches the inflow k_v(t) on.
struct ControlSignal {
    std::vector<double> t;
    std::vector<double> U_H;
    std::vector<double> U_r;
    std::vector<unsigned char> dosing;

    std::size_t size() const { return t.size(); }
    void validate() const;
};

// Constant U_H and dosing for t < until, zero afterwards; constant U_r throughout.
ControlSignal constant_controls(const Grid& grid, double U_H, double U_r, double until,
                                bool dosing);

// Control CSV with header t,U_H,U_r,dosing.
ControlSignal load_control_csv(const std::filesystem::path& path);
void write_control_csv(const std::filesystem::path& path, const ControlSignal& controls);

// Returns the controls sampled at t_j = j tau. Identical grids are passed through;
// otherwise U_H and U_r are interpolated linearly and dosing is held from the last
// sample at or before t_j. Throws DataError if the grid leaves the signal's time span.
ControlSignal controls_on_grid(const ControlSignal& controls, const Grid& grid,
                               bool* resampled = nullptr);

// Throws ConfigError if any U_H or U_r sample leaves [u_min, u_max].
void check_control_box(const ControlSignal& controls, double u_min, double u_max);

}  // namespace phswing
