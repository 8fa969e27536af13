#pragma once

#include "phswing/simulator.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

namespace phswing {

// Per record time: mean and 5%/95% quantiles of H, Q, C, R, S across paths.
struct EnsembleSummary {
    static constexpr std::array<std::string_view, 5> kFields{"H", "Q", "C", "R", "S"};

    std::size_t n_paths = 0;
    std::vector<double> t;
    std::array<std::vector<double>, 5> mean;
    std::array<std::vector<double>, 5> q05;
    std::array<std::vector<double>, 5> q95;

    bool empty() const { return n_paths == 0; }
};

// Streaming accumulator: Welford means and P-square quantile markers, fed in path order.
class SummaryBuilder {
public:
    SummaryBuilder();
    ~SummaryBuilder();
    SummaryBuilder(SummaryBuilder&&) noexcept;
    SummaryBuilder& operator=(SummaryBuilder&&) noexcept;

    void add(const Trajectory& traj);
    EnsembleSummary finish() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

EnsembleSummary summarize(const std::vector<Trajectory>& ensemble);

// Header t,mean_H,q05_H,q95_H,...,mean_S,q05_S,q95_S.
void write_summary_csv(const std::filesystem::path& path, const EnsembleSummary& summary);

}  // namespace phswing
