#include "phswing/dataio.hpp"
#include "phswing/csv.hpp"
#include "phswing/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace phswing {

std::size_t ExperimentTrace::ic_count() const
{
    return static_cast<std::size_t>(
        std::count_if(ca_ic.begin(), ca_ic.end(), [](const auto& v) { return v.has_value(); }));
}

ExperimentTrace load_trace(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open trace file: " + path.string(), ErrorCode::Io);
    const std::string name = path.string();
    std::string line;
    if (!std::getline(in, line))
        throw DataError(name + ": empty trace file");
    auto header = csv::split_row(line);
    ExperimentTrace trace;
    if (header == std::vector<std::string>{"t", "pH", "ca_ise", "ca_ic"})
        trace.has_ic_column = true;
    else if (header != std::vector<std::string>{"t", "pH", "ca_ise"})
        throw DataError(name + ": line 1: expected header t,pH,ca_ise[,ca_ic]");
    const std::size_t columns = trace.has_ic_column ? 4 : 3;

    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (csv::trim(line).empty())
            continue;
        auto cells = csv::split_row(line);
        if (cells.size() != columns) {
            throw DataError(name + ": line " + std::to_string(number) + ": expected "
                            + std::to_string(columns) + " columns, got "
                            + std::to_string(cells.size()));
        }
        try {
            double t = csv::parse_number(cells[0], number, "t");
            double pH = csv::parse_number(cells[1], number, "pH");
            double ise = csv::parse_number(cells[2], number, "ca_ise");
            if (!trace.t.empty() && !(t > trace.t.back()))
                throw DataError("line " + std::to_string(number) + ": time is not strictly increasing");
            if (pH < 0.0 || pH > 14.0)
                throw DataError("line " + std::to_string(number) + ": pH outside [0, 14]");
            if (ise < 0.0)
                throw DataError("line " + std::to_string(number) + ": negative ca_ise");
            std::optional<double> ic;
            if (trace.has_ic_column && !cells[3].empty()) {
                ic = csv::parse_number(cells[3], number, "ca_ic");
                if (*ic < 0.0)
                    throw DataError("line " + std::to_string(number) + ": negative ca_ic");
            }
            trace.t.push_back(t);
            trace.pH.push_back(pH);
            trace.ca_ise.push_back(ise);
            trace.ca_ic.push_back(ic);
        } catch (const DataError& e) {
            throw DataError(name + ": " + e.what());
        }
    }
    if (trace.t.empty())
        throw DataError(name + ": trace has no samples");
    return trace;
}

void save_trace(const std::filesystem::path& path, const ExperimentTrace& trace)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path.string(), ErrorCode::Io);
    out << (trace.has_ic_column ? "t,pH,ca_ise,ca_ic\n" : "t,pH,ca_ise\n");
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << csv::format(trace.t[i]) << ',' << csv::format(trace.pH[i]) << ','
            << csv::format(trace.ca_ise[i]);
        if (trace.has_ic_column) {
            out << ',';
            if (trace.ca_ic[i])
                out << csv::format(*trace.ca_ic[i]);
        }
        out << '\n';
    }
}

Signal derive_uh(const ExperimentTrace& trace, std::size_t window, bool raw_diff)
{
    const std::size_t n = trace.size();
    if (n < 2)
        throw DataError("deriving U_H needs at least 2 samples");
    if (window < 1)
        throw DataError("smoothing window must be at least 1");
    std::vector<double> rate(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double diff = trace.pH[i + 1] - trace.pH[i];
        rate[i] = raw_diff ? diff : diff / (trace.t[i + 1] - trace.t[i]);
    }
    Signal out;
    out.t = trace.t;
    out.value.resize(n);
    double running = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        running += rate[i];
        if (i >= window)
            running -= rate[i - window];
        std::size_t count = std::min(i + 1, window);
        out.value[i] = running / static_cast<double>(count);
    }
    out.value[n - 1] = out.value[n - 2];
    return out;
}

std::vector<double> resample_linear(const Signal& signal, std::span<const double> times)
{
    const auto& t = signal.t;
    if (t.empty() || t.size() != signal.value.size())
        throw DataError("cannot resample an empty or inconsistent signal");
    const double tol = 1e-12 * std::max(1.0, std::abs(t.back()));
    std::vector<double> out;
    out.reserve(times.size());
    for (double s : times) {
        if (s < t.front() - tol || s > t.back() + tol) {
            throw DataError("resampling time " + csv::format(s) + " outside the signal span ["
                                + csv::format(t.front()) + ", " + csv::format(t.back()) + "]",
                            ErrorCode::GridMismatch);
        }
        if (t.size() == 1) {
            out.push_back(signal.value.front());
            continue;
        }
        auto it = std::upper_bound(t.begin(), t.end(), s);
        std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - t.begin()), 1,
                                                 t.size() - 1);
        std::size_t lo = hi - 1;
        double w = (s - t[lo]) / (t[hi] - t[lo]);
        w = std::clamp(w, 0.0, 1.0);
        if (w == 0.0)
            out.push_back(signal.value[lo]);
        else if (w == 1.0)
            out.push_back(signal.value[hi]);
        else
            out.push_back(signal.value[lo] + w * (signal.value[hi] - signal.value[lo]));
    }
    return out;
}

std::vector<SparseSample> resample_sparse(const ExperimentTrace& trace,
                                          std::span<const double> times)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.ca_ic[i])
            idx.push_back(i);
    }
    std::vector<SparseSample> out(times.size());
    if (idx.empty())
        return out;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double s = times[k];
        auto it = std::lower_bound(idx.begin(), idx.end(), s,
                                   [&](std::size_t i, double v) { return trace.t[i] < v; });
        std::size_t best = it == idx.end() ? idx.back() : *it;
        if (it != idx.begin()) {
            std::size_t prev = *(it - 1);
            if (it == idx.end() || s - trace.t[prev] <= trace.t[best] - s)
                best = prev;
        }
        out[k] = SparseSample{true, *trace.ca_ic[best], std::abs(s - trace.t[best])};
    }
    return out;
}

std::vector<double> trace_grid_times(const ExperimentTrace& trace, double tau)
{
    if (!(tau > 0.0))
        throw DataError("tau must be positive");
    double span = trace.t_end() - trace.t_begin();
    auto n = static_cast<std::size_t>(std::floor(span / tau + 1e-9));
    std::vector<double> out(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
        out[j] = static_cast<double>(j) * tau;
    return out;
}

void export_overlay_csv(const std::filesystem::path& path, const EnsembleSummary& summary,
                        const ExperimentTrace* trace)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write " + path.string(), ErrorCode::Io);
    out << "t,Q_ise,Q_ic,Q_ic_staleness,Q_mean,Q_q05,Q_q95,pH_scaled,H_mean_scaled\n";
    if (summary.empty())
        return;

    const std::size_t n = summary.t.size();
    std::vector<double> ise, ph;
    std::vector<SparseSample> ic;
    std::vector<unsigned char> covered(n, 0);
    if (trace) {
        // trace times are shifted so that the first sample is t = 0
        std::vector<double> shifted;
        for (double t : summary.t) {
            double s = t + trace->t_begin();
            shifted.push_back(s);
        }
        std::vector<double> inside;
        for (std::size_t i = 0; i < n; ++i) {
            if (shifted[i] <= trace->t_end() + 1e-12 * std::max(1.0, trace->t_end()))
                covered[i] = 1;
            inside.push_back(std::min(shifted[i], trace->t_end()));
        }
        ise = resample_linear(Signal{trace->t, trace->ca_ise}, inside);
        ph = resample_linear(Signal{trace->t, trace->pH}, inside);
        ic = resample_sparse(*trace, inside);
    }
    constexpr std::size_t kQ = 1;
    for (std::size_t i = 0; i < n; ++i) {
        out << csv::format(summary.t[i]) << ',';
        bool have = trace && covered[i];
        if (have)
            out << csv::format(ise[i]);
        out << ',';
        if (have && ic[i].present)
            out << csv::format(ic[i].value) << ',' << csv::format(ic[i].staleness);
        else
            out << ',';
        out << ',' << csv::format(summary.mean[kQ][i]) << ',' << csv::format(summary.q05[kQ][i])
            << ',' << csv::format(summary.q95[kQ][i]) << ',';
        if (have)
            out << csv::format(kOverlayPhScale * ph[i]);
        out << ',' << csv::format(kOverlayPhScale * summary.mean[0][i]) << '\n';
    }
}

}  // namespace phswing
