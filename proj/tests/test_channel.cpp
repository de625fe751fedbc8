#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rope/channel.hpp"
#include "rope/rng.hpp"

using namespace rope;

namespace {

ChannelParams no_shadow() {
    ChannelParams p;
    p.shadow_sigma_los = p.shadow_sigma_nlosv = p.shadow_sigma_nlosb = 0.0;
    return p;
}

WorldMap empty_map() {
    WorldMap m;
    m.extent_x = m.extent_y = 1000.0;
    return m;
}

VehicleState car(int id, double x, double y, VehicleClass cls = VehicleClass::passenger) {
    VehicleState v;
    v.id = id;
    v.position = {x, y};
    v.velocity = {10.0, 0.0};
    v.antenna_height = cls == VehicleClass::truck_bus ? 3.1 : 1.6;
    v.vclass = cls;
    return v;
}

}  // namespace

TEST_CASE("link classification") {
    auto map = empty_map();
    std::vector<VehicleState> none;

    SUBCASE("clear path is LOS") {
        auto c = classify_link({0, 0}, 1.6, {100, 0}, 1.6, map, none, 1, 2);
        CHECK(c.cls == LinkClass::LOS);
    }
    SUBCASE("building in the way is NLOSb") {
        map.buildings.push_back({40.0, -10.0, 60.0, 10.0});
        auto c = classify_link({0, 0}, 1.6, {100, 0}, 1.6, map, none, 1, 2);
        CHECK(c.cls == LinkClass::NLOSb);
    }
    SUBCASE("tall vehicle in the way is NLOSv") {
        std::vector<VehicleState> traffic{car(3, 50.0, 0.0, VehicleClass::truck_bus)};
        auto c = classify_link({0, 0}, 1.6, {100, 0}, 1.6, map, traffic, 1, 2);
        CHECK(c.cls == LinkClass::NLOSv);
        CHECK(c.n_blockers == 1);
    }
    SUBCASE("low vehicle does not block") {
        std::vector<VehicleState> traffic{car(3, 50.0, 0.0, VehicleClass::passenger)};
        auto c = classify_link({0, 0}, 1.6, {100, 0}, 1.6, map, traffic, 1, 2);
        CHECK(c.cls == LinkClass::LOS);
    }
    SUBCASE("endpoints are never their own blockers") {
        std::vector<VehicleState> traffic{car(1, 0.0, 0.0, VehicleClass::truck_bus),
                                          car(2, 100.0, 0.0, VehicleClass::truck_bus)};
        auto c = classify_link({0, 0}, 3.1, {100, 0}, 3.1, map, traffic, 1, 2);
        CHECK(c.cls == LinkClass::LOS);
    }
    SUBCASE("buildings outrank vehicle blockers") {
        map.buildings.push_back({40.0, -10.0, 60.0, 10.0});
        std::vector<VehicleState> traffic{car(3, 20.0, 0.0, VehicleClass::truck_bus)};
        auto c = classify_link({0, 0}, 1.6, {100, 0}, 1.6, map, traffic, 1, 2);
        CHECK(c.cls == LinkClass::NLOSb);
    }
}

TEST_CASE("path loss ordering and monotonicity") {
    auto p = no_shadow();
    double prev = 0.0;
    for (int i = 1; i <= 8; ++i) {
        double d = 50.0 * i;
        double rss = ground_truth_rss(LinkClass::LOS, d, 24.0, 0, 1, p);
        if (i > 1) CHECK(rss < prev);
        prev = rss;
    }
    double los = ground_truth_rss(LinkClass::LOS, 100.0, 24.0, 0, 1, p);
    double nlosv = ground_truth_rss(LinkClass::NLOSv, 100.0, 24.0, 1, 1, p);
    double nlosb = ground_truth_rss(LinkClass::NLOSb, 100.0, 24.0, 0, 1, p);
    CHECK(los > nlosv);
    CHECK(nlosv > nlosb);
    // blocker losses accumulate but saturate at the cap
    double v2 = ground_truth_rss(LinkClass::NLOSv, 100.0, 24.0, 2, 1, p);
    double v3 = ground_truth_rss(LinkClass::NLOSv, 100.0, 24.0, 3, 1, p);
    double v9 = ground_truth_rss(LinkClass::NLOSv, 100.0, 24.0, 9, 1, p);
    CHECK(v2 > v3);
    CHECK(v3 == v9);
    CHECK_THROWS_AS(ground_truth_rss(LinkClass::LOS, 0.0, 24.0, 0, 1, p), std::invalid_argument);
}

TEST_CASE("rss never exceeds the configured maximum") {
    ChannelParams p;
    for (std::uint64_t k = 0; k < 200; ++k)
        CHECK(ground_truth_rss(LinkClass::LOS, 1.0, 60.0, 0, k, p) <= p.rss_max_dbm);
}

TEST_CASE("shadowing is a deterministic symmetric field") {
    ChannelParams p;
    auto k1 = shadow_stream_key(9, 4, 7, {100.0, 200.0}, p);
    auto k2 = shadow_stream_key(9, 7, 4, {100.0, 200.0}, p);
    CHECK(k1 == k2);
    // same spatial cell, same draw
    auto k3 = shadow_stream_key(9, 4, 7, {101.0 + p.shadow_cell / 2.0, 201.0}, p);
    CHECK(k1 == k3);
    // different cell differs
    auto k4 = shadow_stream_key(9, 4, 7, {100.0 + 2.0 * p.shadow_cell, 200.0}, p);
    CHECK(k1 != k4);
    CHECK(ground_truth_rss(LinkClass::LOS, 100.0, 24.0, 0, k1, p) ==
          ground_truth_rss(LinkClass::LOS, 100.0, 24.0, 0, k1, p));
}

TEST_CASE("shadowing draws have the configured spread") {
    // sample statistics oracle over many keys
    double sum = 0.0, sq = 0.0;
    int n = 20000;
    for (int i = 0; i < n; ++i) {
        double z = keyed_normal(hash_combine(123, static_cast<std::uint64_t>(i)));
        sum += z;
        sq += z * z;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("full oracle responds to geometry") {
    auto map = empty_map();
    map.buildings.push_back({200.0, -50.0, 220.0, 50.0});
    std::vector<VehicleState> traffic{car(1, 0.0, 0.0), car(2, 100.0, 0.0), car(3, 0.0, 100.0)};
    auto p = no_shadow();
    double clear_rss = true_link_rss({0, 0}, 1.6, 1, {100, 0}, 1.6, 2, 23.0, map, traffic, 5, p);
    double blocked =
        true_link_rss({150, 0}, 1.6, 1, {300, 0}, 1.6, 2, 23.0, map, traffic, 5, p);
    CHECK(clear_rss > blocked);  // same 3D geometry class difference dominates
}

TEST_CASE("density context counts strict neighbors") {
    std::vector<VehicleState> traffic{car(1, 0, 0), car(2, 50, 0), car(3, 100, 0),
                                      car(4, 100.0, 0.0)};
    CHECK(density_context(traffic[0], traffic, 100.0) == 1);
    CHECK(density_context(traffic[0], traffic, 100.1) == 3);
    CHECK_THROWS_AS(density_context(traffic[0], traffic, 0.0), std::invalid_argument);
}

TEST_CASE("link database round trip") {
    std::vector<LinkRecord> db;
    LinkRecord a;
    a.type = LinkType::V2I;
    a.tx_id = 7;
    a.rx_id = 0;
    a.x_t = 1.25;
    a.y_t = -3.5;
    a.h_t = 1.6;
    a.v_t = 13.9;
    a.x_r = 87.0;
    a.y_r = 87.0;
    a.h_r = 5.0;
    a.v_r = 0.0;
    a.rss = -71.25;
    a.density = DensityLevel::high;
    LinkRecord b = a;
    b.type = LinkType::V2V;
    b.rx_id = 9;
    b.density = DensityLevel::low;
    db = {a, b};
    export_link_db(db, "db_test.csv");
    auto back = import_link_db("db_test.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].rss == a.rss);
    CHECK(back[0].type == LinkType::V2I);
    CHECK(back[1].type == LinkType::V2V);
    CHECK(back[1].density == DensityLevel::low);
    std::remove("db_test.csv");

    {
        std::ofstream out("db_bad.csv");
        out << "type,tx_id,rx_id,x_t,y_t,h_t,v_t,x_r,y_r,h_r,v_r,rss,density\n";
        out << "V2I,1,2,3,4\n";
    }
    try {
        import_link_db("db_bad.csv");
        CHECK(false);
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::remove("db_bad.csv");
}
