#include "phswing/controls.hpp"
#include "phswing/csv.hpp"
#include "phswing/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace phswing {

void ControlSignal::validate() const
{
    const std::size_t n = t.size();
    if (U_H.size() != n || U_r.size() != n || dosing.size() != n)
        throw DataError("control signal columns have different lengths");
    if (n == 0)
        throw DataError("control signal is empty");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(t[i] > t[i - 1]))
            throw DataError("control signal time is not strictly increasing at sample "
                            + std::to_string(i));
    }
}

ControlSignal constant_controls(const Grid& grid, double U_H, double U_r, double until,
                                bool dosing)
{
    ControlSignal out;
    for (std::size_t j = 0; j <= grid.n_t; ++j) {
        double t = grid.t(j);
        bool active = t < until;
        out.t.push_back(t);
        out.U_H.push_back(active ? U_H : 0.0);
        out.U_r.push_back(U_r);
        out.dosing.push_back(active && dosing ? 1 : 0);
    }
    return out;
}

ControlSignal load_control_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open control file: " + path.string(), ErrorCode::Io);
    std::string line;
    if (!std::getline(in, line))
        throw DataError(path.string() + ": empty control file");
    auto header = csv::split_row(line);
    const std::vector<std::string> expected{"t", "U_H", "U_r", "dosing"};
    if (header != expected)
        throw DataError(path.string() + ":1: expected header t,U_H,U_r,dosing");
    ControlSignal out;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (csv::trim(line).empty())
            continue;
        auto cells = csv::split_row(line);
        if (cells.size() != 4) {
            throw DataError(path.string() + ": line " + std::to_string(number)
                            + ": expected 4 columns");
        }
        out.t.push_back(csv::parse_number(cells[0], number, "t"));
        out.U_H.push_back(csv::parse_number(cells[1], number, "U_H"));
        out.U_r.push_back(csv::parse_number(cells[2], number, "U_r"));
        double dose = csv::parse_number(cells[3], number, "dosing");
        if (dose != 0.0 && dose != 1.0) {
            throw DataError(path.string() + ": line " + std::to_string(number)
                            + ": dosing must be 0 or 1");
        }
        out.dosing.push_back(dose != 0.0 ? 1 : 0);
    }
    out.validate();
    return out;
}

void write_control_csv(const std::filesystem::path& path, const ControlSignal& controls)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path.string(), ErrorCode::Io);
    out << "t,U_H,U_r,dosing\n";
    for (std::size_t i = 0; i < controls.size(); ++i) {
        out << csv::format(controls.t[i]) << ',' << csv::format(controls.U_H[i]) << ','
            << csv::format(controls.U_r[i]) << ',' << (controls.dosing[i] ? 1 : 0) << '\n';
    }
}

ControlSignal controls_on_grid(const ControlSignal& controls, const Grid& grid, bool* resampled)
{
    controls.validate();
    const double tol = 1e-9 * grid.tau;
    bool same = controls.size() == grid.n_t + 1;
    for (std::size_t j = 0; same && j <= grid.n_t; ++j)
        same = std::abs(controls.t[j] - grid.t(j)) <= tol;
    if (resampled)
        *resampled = !same;
    if (same) {
        ControlSignal out = controls;
        for (std::size_t j = 0; j <= grid.n_t; ++j)
            out.t[j] = grid.t(j);
        return out;
    }
    if (grid.t(0) < controls.t.front() - tol || grid.t_end() > controls.t.back() + tol) {
        throw DataError("control signal covers [" + csv::format(controls.t.front()) + ", "
                            + csv::format(controls.t.back()) + "] but the run needs [0, "
                            + csv::format(grid.t_end()) + "]",
                        ErrorCode::GridMismatch);
    }
    ControlSignal out;
    for (std::size_t j = 0; j <= grid.n_t; ++j) {
        double t = std::clamp(grid.t(j), controls.t.front(), controls.t.back());
        auto it = std::upper_bound(controls.t.begin(), controls.t.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - controls.t.begin());
        std::size_t lo = hi == 0 ? 0 : hi - 1;
        if (hi >= controls.size())
            hi = controls.size() - 1;
        double w = 0.0;
        if (hi != lo)
            w = (t - controls.t[lo]) / (controls.t[hi] - controls.t[lo]);
        out.t.push_back(grid.t(j));
        out.U_H.push_back((1.0 - w) * controls.U_H[lo] + w * controls.U_H[hi]);
        out.U_r.push_back((1.0 - w) * controls.U_r[lo] + w * controls.U_r[hi]);
        out.dosing.push_back(controls.dosing[lo]);
    }
    return out;
}

void check_control_box(const ControlSignal& controls, double u_min, double u_max)
{
    for (std::size_t i = 0; i < controls.size(); ++i) {
        if (controls.U_H[i] < u_min || controls.U_H[i] > u_max) {
            throw ConfigError("U_H sample " + std::to_string(i) + " = "
                              + csv::format(controls.U_H[i]) + " outside the control box");
        }
        if (controls.U_r[i] < u_min || controls.U_r[i] > u_max) {
            throw ConfigError("U_r sample " + std::to_string(i) + " = "
                              + csv::format(controls.U_r[i]) + " outside the control box");
        }
    }
}

}  // namespace phswing
