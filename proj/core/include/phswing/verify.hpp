#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace phswing {

enum class VerifyProfile { Default, Coarse };

VerifyProfile parse_verify_profile(std::string_view name);

struct VerifyOptions {
    VerifyProfile profile = VerifyProfile::Default;
    std::size_t paths = 10000;
    std::uint64_t seed = 12345;
    // multiplies the growth speed handed to the solver; -1 reproduces a sign bug
    double speed_sign = 1.0;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    std::string detail;
};

// Least-squares slope of log(error) against log(step) over the refinement levels.
double convergence_order(const std::vector<double>& steps, const std::vector<double>& errors);

CheckResult check_transport_order(const VerifyOptions& options);
CheckResult check_moment_closed_form(const VerifyOptions& options);
CheckResult check_moment_bound(const VerifyOptions& options);
CheckResult check_gbm_moments(const VerifyOptions& options);
CheckResult check_em_strong_order(const VerifyOptions& options);
CheckResult check_em_weak_order(const VerifyOptions& options);
CheckResult check_analytic_ph(const VerifyOptions& options);

std::vector<CheckResult> run_oracle_battery(const VerifyOptions& options);

}  // namespace phswing
