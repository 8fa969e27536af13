#include <doctest.h>

#include "phswing/error.hpp"
#include "phswing/verify.hpp"

#include <cmath>

using namespace phswing;

TEST_CASE("convergence order of a synthetic error sequence")
{
    std::vector<double> h{0.1, 0.05, 0.025, 0.0125}, e2, e1;
    for (double s : h) {
        e2.push_back(3.0 * s * s);
        e1.push_back(0.5 * s * (1.0 + 0.01 * s));
    }
    CHECK(convergence_order(h, e2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(convergence_order(h, e1) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("coarse oracle battery passes")
{
    VerifyOptions o;
    o.profile = VerifyProfile::Coarse;
    o.paths = 2000;
    auto results = run_oracle_battery(o);
    CHECK(results.size() == 7);
    for (const auto& r : results) {
        INFO(r.name << ": " << r.detail);
        CHECK(r.passed);
        CHECK(std::isfinite(r.measured));
    }
}

TEST_CASE("a flipped transport speed is caught")
{
    VerifyOptions o;
    o.profile = VerifyProfile::Coarse;
    o.speed_sign = -1.0;
    CHECK_FALSE(check_transport_order(o).passed);
    CHECK_FALSE(check_moment_closed_form(o).passed);
}

TEST_CASE("profile names")
{
    CHECK(parse_verify_profile("default") == VerifyProfile::Default);
    CHECK(parse_verify_profile("coarse") == VerifyProfile::Coarse);
    CHECK_THROWS_AS(parse_verify_profile("fine"), ConfigError);
}
