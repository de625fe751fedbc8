#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rope/geometry.hpp"

namespace rope {

enum class VehicleClass { passenger, truck_bus };
enum class DensityLevel { low, medium, high };

struct BsSite {
    Vec2 position;
    double antenna_height = 5.0;
    double tx_power_dbm = 24.0;
};

// Axis-aligned road; `a` and `b` are centerline endpoints.
struct RoadSegment {
    Vec2 a;
    Vec2 b;
    double width = 14.0;
    int lanes = 2;

    bool vertical() const { return a.x == b.x; }
    double length() const { return distance(a, b); }
    Rect strip() const {
        double hw = width / 2.0;
        if (vertical()) return {a.x - hw, std::min(a.y, b.y), a.x + hw, std::max(a.y, b.y)};
        return {std::min(a.x, b.x), a.y - hw, std::max(a.x, b.x), a.y + hw};
    }
};

struct WorldMap {
    double extent_x = 0.0;
    double extent_y = 0.0;
    std::vector<RoadSegment> roads;
    std::vector<Rect> buildings;
    std::vector<BsSite> bs_sites;
};

struct VehicleState {
    int id = -1;
    Vec2 position;
    Vec2 velocity;
    double antenna_height = 1.6;
    VehicleClass vclass = VehicleClass::passenger;

    double speed() const { return velocity.norm(); }
};

struct TraceTick {
    double time = 0.0;
    std::vector<VehicleState> states;
};

struct TraceLog {
    std::vector<TraceTick> ticks;
    DensityLevel density_level = DensityLevel::low;
    double tau = 1.0;
};

// Knobs the paper leaves unstated; exposed as configuration.
struct TraceGenParams {
    double speed_limit = 7.0;     // m/s, urban arterial pace
    double max_accel = 2.0;       // m/s^2
    double min_headway = 8.0;     // m, bumper-to-bumper safety distance
    double step = 0.1;            // s, internal integration step
    double warmup = 60.0;         // s, excluded from density accounting
    double truck_fraction = 0.15;
    double passenger_antenna = 1.6;
    double truck_antenna = 3.1;
};

DensityLevel density_level_for(double vehicles_per_hour_per_km);
const char* to_string(DensityLevel level);
const char* to_string(VehicleClass vclass);

WorldMap generate_map(int blocks_x, int blocks_y, double block_size, double road_width,
                      int bs_count, std::uint64_t seed);

TraceLog generate_traces(const WorldMap& map, double density, double duration, double tau,
                         std::uint64_t seed, const TraceGenParams& params = {});

// Total centerline length in km; the denominator of the density unit.
double total_road_km(const WorldMap& map);

// Highest-RSS BS within coverage range; ties break to the lowest index.
std::optional<int> associate_bs(const VehicleState& v, const WorldMap& map,
                                const std::vector<double>& rss_per_bs, double coverage_range);

// Nearest point of any road strip (used to keep extrapolated positions on roads).
Vec2 snap_to_road(const WorldMap& map, const Vec2& p);

// Linear interpolation of vehicle states between ticks. Only vehicles present
// in both bracketing ticks are returned for strictly interior times.
std::vector<VehicleState> states_at(const TraceLog& log, double t);

void export_traces(const TraceLog& log, const std::string& path);
TraceLog import_traces(const std::string& path);

void export_map(const WorldMap& map, const std::string& path);
WorldMap import_map(const std::string& path);

}  // namespace rope
