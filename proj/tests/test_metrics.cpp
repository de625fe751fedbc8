#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rope/metrics.hpp"
#include "rope/rng.hpp"

using namespace rope;

namespace {

constexpr double kPi = 3.14159265358979323846;

// The two written forms of the duration formula; the second is the paper's
// rearrangement for the supplementary angle.
double duration_form_a(double dd, double dv, double alpha, double d) {
    return (std::sqrt(d * d - dd * dd * std::sin(alpha) * std::sin(alpha)) +
            dd * std::cos(alpha)) /
           dv;
}
double duration_form_b(double dd, double dv, double theta, double d) {
    return (std::sqrt(d * d - dd * dd * std::sin(theta) * std::sin(theta)) -
            dd * std::cos(theta)) /
           dv;
}

// 1 ms kinematic stepping: advance the relative position until out of range.
double stepping_exit_time(double dd, double dv, double alpha, double d, double dt = 1e-3) {
    // a sits at distance dd from b; the angle is measured against the
    // direction from a toward b
    Vec2 pos{dd, 0.0};
    Vec2 toward_b{-1.0, 0.0};
    Vec2 vel{dv * std::cos(alpha) * toward_b.x - 0.0, dv * std::sin(alpha)};
    double t = 0.0;
    while (pos.norm() <= d) {
        pos = pos + vel * dt;
        t += dt;
        if (t > 1e4) break;
    }
    return t;
}

}  // namespace

TEST_CASE("normalized strength formula") {
    CHECK(normalized_strength(-45.0, -80.0, -10.0) == 0.5);
    CHECK(normalized_strength(-10.0, -80.0, -10.0) == 1.0);
    CHECK_THROWS_AS(normalized_strength(-80.0, -80.0, -10.0), std::invalid_argument);
    CHECK_THROWS_AS(normalized_strength(-90.0, -80.0, -10.0), std::invalid_argument);
    CHECK_THROWS_AS(normalized_strength(-5.0, -80.0, -10.0), std::invalid_argument);
    CHECK_THROWS_AS(normalized_strength(-45.0, -10.0, -80.0), std::invalid_argument);
}

TEST_CASE("link duration closed form") {
    CHECK(*link_duration({0.0, 10.0, 0.7, 300.0}) == doctest::Approx(30.0));
    CHECK(*link_duration({100.0, 10.0, kPi / 2.0, 300.0}) ==
          doctest::Approx(std::sqrt(80000.0) / 10.0));
    CHECK(*link_duration({100.0, 10.0, kPi, 300.0}) == doctest::Approx(20.0));
    CHECK_FALSE(link_duration({100.0, 0.0, 0.0, 300.0}).has_value());
    CHECK_THROWS_AS(link_duration({400.0, 10.0, 0.0, 300.0}), std::invalid_argument);
    CHECK_THROWS_AS(link_duration({-1.0, 10.0, 0.0, 300.0}), std::invalid_argument);
    // boundary: receding tangentially from the rim
    CHECK(*link_duration({300.0, 10.0, kPi, 300.0}) == doctest::Approx(0.0));
}

TEST_CASE("both written forms of the duration identity agree") {
    Rng rng(42);
    for (int i = 0; i < 20000; ++i) {
        double d = 50.0 + 450.0 * rng.uniform();
        double dd = d * rng.uniform();
        double dv = 0.5 + 29.5 * rng.uniform();
        double alpha = kPi * rng.uniform();
        double a = duration_form_a(dd, dv, alpha, d);
        double b = duration_form_b(dd, dv, kPi - alpha, d);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("duration is continuous in the angle at pi/2") {
    double prev = 0.0;
    for (int i = -50; i <= 50; ++i) {
        double alpha = kPi / 2.0 + i * 1e-4;
        double v = *link_duration({150.0, 12.0, alpha, 300.0});
        if (i > -50) CHECK(std::abs(v - prev) < 1e-2);
        prev = v;
    }
}

TEST_CASE("duration matches kinematic stepping") {
    Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        double d = 50.0 + 450.0 * rng.uniform();
        double dd = 0.95 * d * rng.uniform();
        double dv = std::max(d / 20.0, 1.0) + 10.0 * rng.uniform();
        double alpha = kPi * rng.uniform();
        auto t = link_duration({dd, dv, alpha, d});
        REQUIRE(t.has_value());
        double stepped = stepping_exit_time(dd, dv, alpha, d);
        CHECK(std::abs(*t - stepped) < 2e-3);
    }
}

TEST_CASE("relative kinematics builder matches direct geometry") {
    // a at (100,0) moving +x at 5; b at origin still: receding along the line
    auto k = relative_kinematics({100.0, 0.0}, {5.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, 300.0);
    CHECK(k.displacement == doctest::Approx(100.0));
    CHECK(k.speed == doctest::Approx(5.0));
    CHECK(k.angle == doctest::Approx(kPi));
    CHECK(*link_duration(k) == doctest::Approx(40.0));
    // symmetric in the endpoints
    auto kr = relative_kinematics({0.0, 0.0}, {0.0, 0.0}, {100.0, 0.0}, {5.0, 0.0}, 300.0);
    CHECK(kr.angle == doctest::Approx(k.angle));
    CHECK(kr.speed == doctest::Approx(k.speed));
}

TEST_CASE("connectivity normalization") {
    CHECK(link_connectivity(0.5, 1.0) == 0.5);
    CHECK(link_connectivity(2.0, 1.0) == 1.0);
    CHECK(link_connectivity(std::nullopt, 1.0) == 1.0);
    CHECK_THROWS_AS(link_connectivity(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("path aggregation") {
    std::vector<EdgeMetrics> edges{{0.9, 1.0, 1}, {0.8, 0.7, 1}};
    auto m = path_metrics(edges);
    CHECK(m.strength == 0.8);
    CHECK(m.connectivity == 0.7);
    CHECK(m.hops == 2);

    auto single = path_metrics({{0.3, 0.4, 1}});
    CHECK(single.strength == 0.3);
    CHECK(single.hops == 1);

    std::swap(edges[0], edges[1]);
    auto swapped = path_metrics(edges);
    CHECK(swapped.strength == m.strength);
    CHECK(swapped.connectivity == m.connectivity);
    CHECK(swapped.hops == m.hops);

    CHECK_THROWS_AS(path_metrics({}), std::invalid_argument);
}

TEST_CASE("appending an edge never improves the concave metrics") {
    Rng rng(11);
    std::vector<EdgeMetrics> edges;
    PathMetrics prev{1.0, 1.0, 0};
    for (int i = 0; i < 50; ++i) {
        edges.push_back({rng.uniform(), rng.uniform(), 1});
        auto m = path_metrics(edges);
        if (i > 0) {
            CHECK(m.strength <= prev.strength);
            CHECK(m.connectivity <= prev.connectivity);
            CHECK(m.hops == prev.hops + 1);
        }
        prev = m;
    }
}
