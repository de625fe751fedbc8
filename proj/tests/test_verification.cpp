#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rope/verification.hpp"

using namespace rope;

namespace {

struct FakeWorld {
    // per undirected link: measured rss and remaining duration at probe time
    std::map<std::pair<int, int>, LinkObservation> links;
    mutable std::map<std::pair<int, int>, int> probes;

    void set(int u, int v, double rss, double duration) {
        links[{std::min(u, v), std::max(u, v)}] = {rss, duration, true};
    }
    LinkProbe probe() const {
        return [this](int u, int v, double) {
            auto key = std::make_pair(std::min(u, v), std::max(u, v));
            ++probes[key];
            auto it = links.find(key);
            if (it == links.end()) return LinkObservation{-200.0, 0.0, false};
            return it->second;
        };
    }
    int probes_for(int u, int v) const {
        auto it = probes.find({std::min(u, v), std::max(u, v)});
        return it == probes.end() ? 0 : it->second;
    }
};

RankedPath path_of(std::vector<int> nodes, PathRank rank) {
    RankedPath p;
    p.nodes = std::move(nodes);
    p.metrics = {0.5, 1.0, static_cast<int>(p.nodes.size()) - 1};
    p.rank = rank;
    return p;
}

}  // namespace

TEST_CASE("single link check") {
    VerifyParams params;
    FakeWorld world;
    world.set(0, 1, -70.0, 100.0);
    auto reports = link_check(path_of({0, 1}, PathRank::J1), world.probe(), 10.0, 0.1, params);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].qualified);
    CHECK(reports[0].connectivity == 1.0);

    // boundary: rss exactly at the threshold is not qualified
    world.set(0, 1, -80.0, 100.0);
    reports = link_check(path_of({0, 1}, PathRank::J1), world.probe(), 10.0, 0.1, params);
    CHECK_FALSE(reports[0].qualified);

    // duration arithmetic: 1.05 s observed, 0.1 s consumed -> 0.95 estimated
    world.set(0, 1, -70.0, 1.05);
    reports = link_check(path_of({0, 1}, PathRank::J1), world.probe(), 10.0, 0.1, params);
    CHECK(reports[0].connectivity == doctest::Approx(0.95));
    CHECK_FALSE(reports[0].qualified);

    // a vanished endpoint disqualifies the link
    auto missing = link_check(path_of({0, 2}, PathRank::J1), world.probe(), 10.0, 0.1, params);
    CHECK(missing[0].endpoint_missing);
    CHECK_FALSE(missing[0].qualified);

    CHECK_THROWS_AS(link_check(path_of({0, 1}, PathRank::J1), world.probe(), 10.0, 0.6, params),
                    std::invalid_argument);
}

TEST_CASE("qualified first path short-circuits the round") {
    VerifyParams params;
    FakeWorld world;
    world.set(0, 1, -60.0, 100.0);
    world.set(1, 5, -60.0, 100.0);
    world.set(0, 2, -60.0, 100.0);
    world.set(2, 5, -60.0, 100.0);
    std::vector<RankedPath> paths{path_of({0, 1, 5}, PathRank::J1),
                                  path_of({0, 2, 5}, PathRank::J2)};
    auto result = path_check(paths, world.probe(), 10.0, params);
    REQUIRE(result.selected.has_value());
    CHECK(result.selected->nodes == std::vector<int>{0, 1, 5});
    CHECK(result.checked.size() == 1);
    CHECK(world.probes_for(0, 2) == 0);  // J2 was never touched
    CHECK(result.fault_set.empty());
}

TEST_CASE("fault set skips doomed paths without checking them") {
    VerifyParams params;
    FakeWorld world;
    world.set(0, 1, -90.0, 100.0);  // bad link, shared by J1 and J2
    world.set(1, 5, -60.0, 100.0);
    world.set(0, 2, -60.0, 100.0);
    world.set(2, 1, -60.0, 100.0);
    world.set(0, 3, -60.0, 100.0);
    world.set(3, 5, -60.0, 100.0);
    std::vector<RankedPath> paths{path_of({0, 1, 5}, PathRank::J1),
                                  path_of({0, 1, 2, 5}, PathRank::J2),  // contains faulted 0-1
                                  path_of({0, 3, 5}, PathRank::J3)};
    auto result = path_check(paths, world.probe(), 10.0, params);
    REQUIRE(result.selected.has_value());
    CHECK(result.selected->nodes == std::vector<int>{0, 3, 5});
    CHECK(result.skipped == std::vector<std::size_t>{1});
    CHECK(world.probes_for(0, 1) == 1);  // faulted link measured exactly once
    CHECK(result.fault_set.count({0, 1}) == 1);
}

TEST_CASE("mending splices two unqualified paths at a shared node") {
    VerifyParams params;
    FakeWorld world;
    // J2 = 0-7-2-8-9: source side broken, destination side from node 2 fine
    world.set(0, 7, -95.0, 100.0);
    world.set(7, 2, -60.0, 100.0);
    world.set(2, 8, -60.0, 100.0);
    world.set(8, 9, -60.0, 100.0);
    // J3 = 0-4-2-6-9: source side to node 2 fine, destination side broken
    world.set(0, 4, -60.0, 100.0);
    world.set(4, 2, -60.0, 100.0);
    world.set(2, 6, -60.0, 100.0);
    world.set(6, 9, -95.0, 100.0);
    std::vector<RankedPath> paths{path_of({0, 7, 2, 8, 9}, PathRank::J2),
                                  path_of({0, 4, 2, 6, 9}, PathRank::J3)};
    auto result = path_check(paths, world.probe(), 10.0, params);
    CHECK_FALSE(result.selected.has_value());
    REQUIRE(result.checked.size() == 2);
    auto mended = mend_paths(result.checked, params);
    REQUIRE(mended.has_value());
    CHECK(mended->nodes == std::vector<int>{0, 4, 2, 8, 9});
    CHECK(mended->rank == PathRank::mended);
    CHECK(mended->metrics.hops == 4);
    CHECK(mended->metrics.hops < params.hop_max);
}

TEST_CASE("mending fails when no flag combination works") {
    VerifyParams params;
    FakeWorld world;
    // both paths share node 2 but both break on the source side
    world.set(0, 7, -95.0, 100.0);
    world.set(7, 2, -60.0, 100.0);
    world.set(2, 8, -60.0, 100.0);
    world.set(8, 9, -60.0, 100.0);
    world.set(0, 4, -95.0, 100.0);
    world.set(4, 2, -60.0, 100.0);
    world.set(2, 6, -60.0, 100.0);
    world.set(6, 9, -60.0, 100.0);
    std::vector<RankedPath> paths{path_of({0, 7, 2, 8, 9}, PathRank::J2),
                                  path_of({0, 4, 2, 6, 9}, PathRank::J3)};
    auto result = path_check(paths, world.probe(), 10.0, params);
    CHECK_FALSE(result.selected.has_value());
    CHECK_FALSE(mend_paths(result.checked, params).has_value());

    // node-disjoint unqualified paths cannot mend either
    FakeWorld w2;
    w2.set(0, 1, -95.0, 100.0);
    w2.set(1, 9, -60.0, 100.0);
    w2.set(0, 2, -95.0, 100.0);
    w2.set(2, 9, -60.0, 100.0);
    std::vector<RankedPath> disjoint{path_of({0, 1, 9}, PathRank::J1),
                                     path_of({0, 2, 9}, PathRank::J2)};
    auto r2 = path_check(disjoint, w2.probe(), 10.0, params);
    CHECK_FALSE(mend_paths(r2.checked, params).has_value());

    // fewer than two checked paths: no mend
    CHECK_FALSE(mend_paths({r2.checked[0]}, params).has_value());
}

TEST_CASE("mended paths respect the hop bound") {
    VerifyParams params;
    params.hop_max = 4;  // the splice below would need 4 hops: not < 4
    FakeWorld world;
    world.set(0, 7, -95.0, 100.0);
    world.set(7, 2, -60.0, 100.0);
    world.set(2, 8, -60.0, 100.0);
    world.set(8, 9, -60.0, 100.0);
    world.set(0, 4, -60.0, 100.0);
    world.set(4, 2, -60.0, 100.0);
    world.set(2, 6, -60.0, 100.0);
    world.set(6, 9, -95.0, 100.0);
    std::vector<RankedPath> paths{path_of({0, 7, 2, 8, 9}, PathRank::J2),
                                  path_of({0, 4, 2, 6, 9}, PathRank::J3)};
    auto result = path_check(paths, world.probe(), 10.0, params);
    CHECK_FALSE(mend_paths(result.checked, params).has_value());
}

TEST_CASE("activation preference order") {
    auto ranked = path_of({0, 1}, PathRank::J2);
    auto mended = path_of({0, 2, 1}, PathRank::mended);
    auto direct = path_of({0, 9}, PathRank::direct);
    CHECK(select_final(ranked, mended, direct).kind == ActivationKind::ranked);
    CHECK(select_final(std::nullopt, mended, direct).kind == ActivationKind::mended);
    CHECK(select_final(std::nullopt, std::nullopt, direct).kind == ActivationKind::direct);
    auto gap = select_final(std::nullopt, std::nullopt, std::nullopt);
    CHECK(gap.kind == ActivationKind::gap);
    CHECK_FALSE(gap.path.has_value());
}

TEST_CASE("full round emits an auditable log") {
    VerifyParams params;
    FakeWorld world;
    world.set(0, 1, -90.0, 100.0);
    world.set(1, 5, -60.0, 100.0);
    world.set(0, 2, -60.0, 100.0);
    world.set(2, 5, -60.0, 100.0);
    std::vector<RankedPath> paths{path_of({0, 1, 5}, PathRank::J1),
                                  path_of({0, 2, 5}, PathRank::J2)};
    auto out = verify_and_select(paths, std::nullopt, world.probe(), 10.0, 42, params);
    CHECK(out.decision.kind == ActivationKind::ranked);
    REQUIRE(out.decision.path.has_value());
    CHECK(out.decision.path->nodes == std::vector<int>{0, 2, 5});
    REQUIRE(out.log.size() == 4);
    CHECK(out.log[0].t == doctest::Approx(10.0 - params.delta[0]));
    CHECK(out.log[0].vue == 42);
    CHECK_FALSE(out.log[0].qualified);
    CHECK(out.log[2].t == doctest::Approx(10.0 - params.delta[1]));

    append_verification_log(out.log, "verif_test.log");
    std::ifstream in("verif_test.log");
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
    std::remove("verif_test.log");
}

TEST_CASE("gap when nothing survives and no direct fallback exists") {
    VerifyParams params;
    FakeWorld world;
    world.set(0, 1, -95.0, 100.0);
    world.set(1, 5, -60.0, 100.0);
    std::vector<RankedPath> paths{path_of({0, 1, 5}, PathRank::J1)};
    auto out = verify_and_select(paths, std::nullopt, world.probe(), 10.0, 7, params);
    CHECK(out.decision.kind == ActivationKind::gap);
    auto direct = path_of({0, 9}, PathRank::direct);
    auto out2 = verify_and_select(paths, direct, world.probe(), 10.0, 7, params);
    CHECK(out2.decision.kind == ActivationKind::direct);
}
