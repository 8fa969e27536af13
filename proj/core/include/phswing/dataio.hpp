#pragma once

#include "phswing/summary.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace phswing {

// Measured trace: pH, continuous ISE calcium and sparse IC calcium samples.
struct ExperimentTrace {
    int experiment_id = 0;
    std::vector<double> t;
    std::vector<double> pH;
    std::vector<double> ca_ise;
    std::vector<std::optional<double>> ca_ic;
    bool has_ic_column = false;

    std::size_t size() const { return t.size(); }
    std::size_t ic_count() const;
    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }
};

// CSV with header t,pH,ca_ise[,ca_ic]; empty ca_ic cells are allowed.
ExperimentTrace load_trace(const std::filesystem::path& path);
void save_trace(const std::filesystem::path& path, const ExperimentTrace& trace);

struct Signal {
    std::vector<double> t;
    std::vector<double> value;
};

// pH rate from first differences divided by the sample spacing (or the raw
// differences with raw_diff), assigned to the left sample, smoothed by a trailing
// moving average of `window` values; the final sample repeats the last rate.
Signal derive_uh(const ExperimentTrace& trace, std::size_t window = 1, bool raw_diff = false);

// Linear interpolation onto `times`; throws DataError when a time lies outside the span.
std::vector<double> resample_linear(const Signal& signal, std::span<const double> times);

struct SparseSample {
    bool present = false;
    double value = 0.0;
    double staleness = 0.0;  // |t - t_sample| of the nearest sample
};

// Nearest IC sample for each time, with its distance in time.
std::vector<SparseSample> resample_sparse(const ExperimentTrace& trace,
                                          std::span<const double> times);

// Uniform grid times 0, tau, ... covering the trace duration (trace time shifted to start at 0).
std::vector<double> trace_grid_times(const ExperimentTrace& trace, double tau);

constexpr double kOverlayPhScale = 0.01;

// Overlay of measured and simulated calcium: columns
// t,Q_ise,Q_ic,Q_ic_staleness,Q_mean,Q_q05,Q_q95,pH_scaled,H_mean_scaled, with pH
// values multiplied by kOverlayPhScale. Trace columns are empty
// when no trace is given; an empty ensemble writes only the header.
void export_overlay_csv(const std::filesystem::path& path, const EnsembleSummary& summary,
                        const ExperimentTrace* trace);

}  // namespace phswing
