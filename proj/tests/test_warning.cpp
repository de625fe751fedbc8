#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rope/warning.hpp"

using namespace rope;

namespace {

PredictedVue vue(int id, double x, double y, double vx = 10.0, double vy = 0.0) {
    PredictedVue p;
    p.id = id;
    p.position = {x, y};
    p.velocity = {vx, vy};
    p.antenna_height = 1.6;
    return p;
}

}  // namespace

TEST_CASE("warning rule") {
    Vec2 bs{0.0, 0.0};
    SUBCASE("pessimistic bound crosses the threshold") {
        auto d = check_warning(1, {-75.0, 36.0}, {100.0, 0.0}, bs, -80.0, 400.0);
        CHECK(d.triggered);
        CHECK(d.cause == WarningCause::low_strength);
        CHECK(d.sigma == doctest::Approx(6.0));
    }
    SUBCASE("healthy link") {
        auto d = check_warning(1, {-70.0, 25.0}, {100.0, 0.0}, bs, -80.0, 400.0);
        CHECK_FALSE(d.triggered);
        CHECK(d.cause == WarningCause::none);
    }
    SUBCASE("leaving coverage") {
        auto d = check_warning(1, {-60.0, 1.0}, {410.0, 0.0}, bs, -80.0, 400.0);
        CHECK(d.triggered);
        CHECK(d.cause == WarningCause::out_of_coverage);
    }
    SUBCASE("coverage outranks strength when both hold") {
        auto d = check_warning(1, {-85.0, 4.0}, {500.0, 0.0}, bs, -80.0, 400.0);
        CHECK(d.cause == WarningCause::out_of_coverage);
    }
    SUBCASE("no serving BS at all") {
        auto d = check_warning(1, {-60.0, 1.0}, {0.0, 0.0}, std::nullopt, -80.0, 400.0);
        CHECK(d.cause == WarningCause::out_of_coverage);
    }
    SUBCASE("triggered iff cause set") {
        for (double mu : {-85.0, -70.0}) {
            auto d = check_warning(1, {mu, 1.0}, {10.0, 0.0}, bs, -80.0, 400.0);
            CHECK(d.triggered == (d.cause != WarningCause::none));
        }
    }
}

TEST_CASE("virtual topology construction") {
    std::vector<BsSite> sites{{{0.0, 0.0}, 5.0, 24.0}};
    TopologyParams params;

    SUBCASE("far pairs never consult the V2V model") {
        auto a = vue(1, 100.0, 0.0);
        auto b = vue(2, 600.0, 0.0);
        int calls = 0;
        auto model = [&](const PredictedVue&, const PredictedVue&) {
            ++calls;
            return StrengthDistribution{-50.0, 1.0};
        };
        auto topo = build_virtual_topology({a, b}, sites, model, params, 1.0);
        CHECK(calls == 0);
        CHECK(topo.graph.find_edge(0, 1) == nullptr);
    }

    SUBCASE("V2I admission is strict in the mean") {
        auto a = vue(1, 100.0, 0.0);
        a.bs_index = 0;
        a.v2i = StrengthDistribution{-80.0, 1.0};  // exactly the threshold
        auto model = [](const PredictedVue&, const PredictedVue&) {
            return StrengthDistribution{-200.0, 1.0};
        };
        auto topo = build_virtual_topology({a}, sites, model, params, 1.0);
        CHECK(topo.graph.find_edge(0, topo.bs_node) == nullptr);
        a.v2i = StrengthDistribution{-79.9, 1.0};
        topo = build_virtual_topology({a}, sites, model, params, 1.0);
        CHECK(topo.graph.find_edge(0, topo.bs_node) != nullptr);
    }

    SUBCASE("V2I edges require predicted coverage") {
        auto a = vue(1, 500.0, 0.0);  // beyond d_i from its BS
        a.bs_index = 0;
        a.v2i = StrengthDistribution{-50.0, 1.0};
        auto model = [](const PredictedVue&, const PredictedVue&) {
            return StrengthDistribution{-200.0, 1.0};
        };
        auto topo = build_virtual_topology({a}, sites, model, params, 1.0);
        CHECK(topo.graph.edge_count() == 0);
    }

    SUBCASE("disconnected VUE keeps its node") {
        auto a = vue(1, 2000.0, 2000.0);
        auto model = [](const PredictedVue&, const PredictedVue&) {
            return StrengthDistribution{-200.0, 1.0};
        };
        auto topo = build_virtual_topology({a}, sites, model, params, 1.0);
        CHECK(topo.graph.n == 2);  // the VUE plus the BS super-node
        CHECK(topo.graph.adj[0].empty());
        CHECK(topo.node_of(1) == 0);
        CHECK(topo.node_of(99) == -1);
    }

    SUBCASE("a warned VUE can retain its V2I edge") {
        auto a = vue(1, 100.0, 0.0);
        a.bs_index = 0;
        a.v2i = StrengthDistribution{-78.0, 25.0};  // mu-sigma = -83 <= -80, mu > -80
        auto warn = check_warning(a.id, *a.v2i, a.position, sites[0].position, params.gamma_th,
                                  params.d_i);
        CHECK(warn.triggered);
        auto model = [](const PredictedVue&, const PredictedVue&) {
            return StrengthDistribution{-200.0, 1.0};
        };
        auto topo = build_virtual_topology({a}, sites, model, params, 1.0);
        CHECK(topo.graph.find_edge(0, topo.bs_node) != nullptr);
    }

    SUBCASE("V2V edges carry metrics and respect strict admission") {
        auto a = vue(1, 0.0, 10.0, 10.0, 0.0);
        auto b = vue(2, 100.0, 10.0, 10.0, 0.0);  // same velocity: static pair
        auto model = [](const PredictedVue&, const PredictedVue&) {
            return StrengthDistribution{-45.0, 1.0};
        };
        auto topo = build_virtual_topology({a, b}, sites, model, params, 1.0);
        const auto* e = topo.graph.find_edge(0, 1);
        REQUIRE(e != nullptr);
        CHECK(e->strength == doctest::Approx(0.5));  // (-45+80)/70
        CHECK(e->connectivity == doctest::Approx(1.0));
    }

    SUBCASE("inferred mean above gamma_max clamps to full strength") {
        TopologyParams p2 = params;
        auto a = vue(1, 0.0, 10.0);
        auto b = vue(2, 50.0, 10.0);
        auto model = [](const PredictedVue&, const PredictedVue&) {
            return StrengthDistribution{-5.0, 1.0};  // above gamma_max
        };
        auto topo = build_virtual_topology({a, b}, sites, model, p2, 1.0);
        const auto* e = topo.graph.find_edge(0, 1);
        REQUIRE(e != nullptr);
        CHECK(e->strength == doctest::Approx(1.0));
    }
}
