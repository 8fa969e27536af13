#include "phswing/summary.hpp"
#include "phswing/csv.hpp"
#include "phswing/error.hpp"

#include <boost/accumulators/accumulators.hpp>
#include <boost/accumulators/statistics/p_square_quantile.hpp>
#include <boost/accumulators/statistics/stats.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace phswing {

namespace acc = boost::accumulators;

namespace {

using Quantile = acc::accumulator_set<double, acc::stats<acc::tag::p_square_quantile>>;

// P-square needs five samples before its markers are defined; below that the
// exact interpolated quantile of the stored samples is used.
class StreamingQuantile {
public:
    explicit StreamingQuantile(double p) : p_(p), acc_(acc::quantile_probability = p) {}

    void add(double x)
    {
        if (first_.size() < 5)
            first_.push_back(x);
        acc_(x);
        ++count_;
    }

    double value() const
    {
        if (count_ >= 5)
            return acc::p_square_quantile(acc_);
        std::vector<double> sorted = first_;
        std::sort(sorted.begin(), sorted.end());
        double pos = p_ * static_cast<double>(sorted.size() - 1);
        std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        double w = pos - static_cast<double>(lo);
        return (1.0 - w) * sorted[lo] + w * sorted[hi];
    }

private:
    double p_;
    Quantile acc_;
    std::vector<double> first_;
    std::size_t count_ = 0;
};

struct Channel {
    double mean = 0.0;
    StreamingQuantile low{0.05};
    StreamingQuantile high{0.95};
};

}  // namespace

struct SummaryBuilder::Impl {
    std::size_t n = 0;
    std::vector<double> t;
    std::vector<std::array<Channel, 5>> rows;
};

SummaryBuilder::SummaryBuilder() : impl_(std::make_unique<Impl>()) {}
SummaryBuilder::~SummaryBuilder() = default;
SummaryBuilder::SummaryBuilder(SummaryBuilder&&) noexcept = default;
SummaryBuilder& SummaryBuilder::operator=(SummaryBuilder&&) noexcept = default;

void SummaryBuilder::add(const Trajectory& traj)
{
    auto& d = *impl_;
    if (d.n == 0) {
        d.t = traj.t;
        d.rows.resize(traj.size());
    } else if (traj.size() != d.t.size()) {
        throw DataError("ensemble trajectories have different record times", ErrorCode::GridMismatch);
    }
    ++d.n;
    const std::array<const std::vector<double>*, 5> fields{&traj.H, &traj.Q, &traj.C, &traj.R,
                                                           &traj.S};
    const double inv = 1.0 / static_cast<double>(d.n);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        for (std::size_t f = 0; f < 5; ++f) {
            double x = (*fields[f])[i];
            auto& ch = d.rows[i][f];
            ch.mean += (x - ch.mean) * inv;
            ch.low.add(x);
            ch.high.add(x);
        }
    }
}

EnsembleSummary SummaryBuilder::finish() const
{
    const auto& d = *impl_;
    EnsembleSummary out;
    out.n_paths = d.n;
    out.t = d.t;
    for (std::size_t f = 0; f < 5; ++f) {
        out.mean[f].resize(d.rows.size());
        out.q05[f].resize(d.rows.size());
        out.q95[f].resize(d.rows.size());
        for (std::size_t i = 0; i < d.rows.size(); ++i) {
            const auto& ch = d.rows[i][f];
            out.mean[f][i] = ch.mean;
            out.q05[f][i] = ch.low.value();
            out.q95[f][i] = ch.high.value();
        }
    }
    return out;
}

EnsembleSummary summarize(const std::vector<Trajectory>& ensemble)
{
    SummaryBuilder builder;
    for (const auto& traj : ensemble)
        builder.add(traj);
    return builder.finish();
}

void write_summary_csv(const std::filesystem::path& path, const EnsembleSummary& summary)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path.string(), ErrorCode::Io);
    out << 't';
    for (auto name : EnsembleSummary::kFields)
        out << ",mean_" << name << ",q05_" << name << ",q95_" << name;
    out << '\n';
    for (std::size_t i = 0; i < summary.t.size(); ++i) {
        std::vector<double> row{summary.t[i]};
        for (std::size_t f = 0; f < 5; ++f) {
            row.push_back(summary.mean[f][i]);
            row.push_back(summary.q05[f][i]);
            row.push_back(summary.q95[f][i]);
        }
        csv::write_row(out, row);
    }
}

}  // namespace phswing
