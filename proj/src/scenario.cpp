#include "rope/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rope/rng.hpp"

namespace rope {

DensityLevel density_level_for(double d) {
    if (d < 300.0) return DensityLevel::low;
    if (d < 500.0) return DensityLevel::medium;
    return DensityLevel::high;
}

const char* to_string(DensityLevel level) {
    switch (level) {
        case DensityLevel::low: return "low";
        case DensityLevel::medium: return "medium";
        default: return "high";
    }
}

const char* to_string(VehicleClass vclass) {
    return vclass == VehicleClass::passenger ? "passenger" : "truck_bus";
}

static DensityLevel density_from_string(const std::string& s) {
    if (s == "low") return DensityLevel::low;
    if (s == "medium") return DensityLevel::medium;
    if (s == "high") return DensityLevel::high;
    throw std::invalid_argument("unknown density level: " + s);
}

WorldMap generate_map(int blocks_x, int blocks_y, double block_size, double road_width,
                      int bs_count, std::uint64_t /*seed*/) {
    if (blocks_x < 1 || blocks_y < 1 || bs_count < 1)
        throw std::invalid_argument("generate_map: counts must be >= 1");
    if (!(block_size > road_width) || !(road_width > 0.0))
        throw std::invalid_argument("generate_map: need block_size > road_width > 0");

    WorldMap map;
    double pitch = block_size + road_width;
    map.extent_x = blocks_x * pitch;
    map.extent_y = blocks_y * pitch;

    // One road strip on the low side of each block row/column; block faces
    // flush with the far boundary.
    for (int i = 0; i < blocks_x; ++i) {
        double cx = i * pitch + road_width / 2.0;
        map.roads.push_back({{cx, 0.0}, {cx, map.extent_y}, road_width, 2});
    }
    for (int j = 0; j < blocks_y; ++j) {
        double cy = j * pitch + road_width / 2.0;
        map.roads.push_back({{0.0, cy}, {map.extent_x, cy}, road_width, 2});
    }
    for (int i = 0; i < blocks_x; ++i) {
        for (int j = 0; j < blocks_y; ++j) {
            map.buildings.push_back({i * pitch + road_width, j * pitch + road_width,
                                     (i + 1) * pitch, (j + 1) * pitch});
        }
    }

    // BSs at intersections, spread on a coarse sub-grid.
    int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(bs_count))));
    int rows = (bs_count + cols - 1) / cols;
    for (int k = 0; k < bs_count; ++k) {
        int c = k % cols;
        int r = k / cols;
        int i = std::min(blocks_x - 1, static_cast<int>((c + 0.5) * blocks_x / cols));
        int j = std::min(blocks_y - 1, static_cast<int>((r + 0.5) * blocks_y / rows));
        Vec2 pos{i * pitch + road_width / 2.0, j * pitch + road_width / 2.0};
        map.bs_sites.push_back({pos, 5.0, 24.0});
    }
    return map;
}

double total_road_km(const WorldMap& map) {
    double m = 0.0;
    for (const auto& r : map.roads) m += r.length();
    return m / 1000.0;
}

std::optional<int> associate_bs(const VehicleState& v, const WorldMap& map,
                                const std::vector<double>& rss_per_bs, double coverage_range) {
    if (map.bs_sites.empty()) throw std::invalid_argument("associate_bs: no BS sites");
    if (rss_per_bs.size() != map.bs_sites.size())
        throw std::invalid_argument("associate_bs: rss list not aligned with bs_sites");
    std::optional<int> best;
    for (std::size_t i = 0; i < map.bs_sites.size(); ++i) {
        if (distance(v.position, map.bs_sites[i].position) > coverage_range) continue;
        if (!best || rss_per_bs[i] > rss_per_bs[*best]) best = static_cast<int>(i);
    }
    return best;
}

Vec2 snap_to_road(const WorldMap& map, const Vec2& p) {
    Vec2 best = p;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& r : map.roads) {
        Rect strip = r.strip();
        Vec2 q{std::clamp(p.x, strip.xmin, strip.xmax), std::clamp(p.y, strip.ymin, strip.ymax)};
        double d = distance(p, q);
        if (d < best_d) {
            best_d = d;
            best = q;
        }
    }
    return best;
}

namespace {

// One vehicle inside the lane-based microsimulation. `progress` runs from 0
// at the entry boundary to the road length at the exit boundary.
struct SimCar {
    int id;
    double progress;
    double prev_progress;
    double speed;
    VehicleClass vclass;
    double antenna_height;
};

struct DirectedLane {
    int road_idx;
    int dir;  // +1: increasing axis coordinate, -1: decreasing
    double length;
    std::vector<double> junction_progress;  // sorted ascending
    std::vector<int> junction_road;         // crossing road index per junction
    std::vector<SimCar> cars;               // kept sorted by progress ascending
};

double axis_coord_to_progress(const DirectedLane& lane, double coord) {
    return lane.dir > 0 ? coord : lane.length - coord;
}

Vec2 lane_world_pos(const WorldMap& map, const DirectedLane& lane, double progress) {
    const auto& road = map.roads[lane.road_idx];
    double coord = lane.dir > 0 ? progress : lane.length - progress;
    double offset = lane.dir * road.width / 4.0;
    if (road.vertical()) return {road.a.x + offset, coord};
    return {coord, road.a.y - offset};
}

Vec2 lane_velocity(const WorldMap& map, const DirectedLane& lane, double speed) {
    const auto& road = map.roads[lane.road_idx];
    if (road.vertical()) return {0.0, lane.dir * speed};
    return {lane.dir * speed, 0.0};
}

bool lane_clear_around(const DirectedLane& lane, double progress, double clearance) {
    for (const auto& c : lane.cars)
        if (std::abs(c.progress - progress) < clearance) return false;
    return true;
}

}  // namespace

TraceLog generate_traces(const WorldMap& map, double density, double duration, double tau,
                         std::uint64_t seed, const TraceGenParams& params) {
    if (!(density > 0.0)) throw std::invalid_argument("generate_traces: density must be > 0");
    if (!(tau > 0.0) || duration < tau)
        throw std::invalid_argument("generate_traces: need duration >= tau > 0");

    std::vector<DirectedLane> lanes;
    for (int ri = 0; ri < static_cast<int>(map.roads.size()); ++ri) {
        const auto& road = map.roads[ri];
        for (int dir : {1, -1}) {
            DirectedLane lane{ri, dir, road.length(), {}, {}, {}};
            for (int rj = 0; rj < static_cast<int>(map.roads.size()); ++rj) {
                const auto& other = map.roads[rj];
                if (other.vertical() == road.vertical()) continue;
                double coord = road.vertical() ? other.a.y : other.a.x;
                lane.junction_progress.push_back(axis_coord_to_progress(lane, coord));
                lane.junction_road.push_back(rj);
            }
            // sort junctions in travel order
            std::vector<std::size_t> order(lane.junction_progress.size());
            for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return lane.junction_progress[a] < lane.junction_progress[b];
            });
            DirectedLane sorted = lane;
            for (std::size_t k = 0; k < order.size(); ++k) {
                sorted.junction_progress[k] = lane.junction_progress[order[k]];
                sorted.junction_road[k] = lane.junction_road[order[k]];
            }
            lanes.push_back(std::move(sorted));
        }
    }

    Rng rng(hash_combine(seed, 0x524f5045ULL));
    double dt = params.step;
    int steps_per_tick = static_cast<int>(std::lround(tau / dt));
    if (steps_per_tick < 1 || std::abs(steps_per_tick * dt - tau) > 1e-9)
        throw std::invalid_argument("generate_traces: tau must be a multiple of the step");
    int total_steps = static_cast<int>(std::lround(duration / dt));

    double arrival_rate = density * total_road_km(map) / 3600.0;  // vehicles/s overall
    double per_entry = arrival_rate / static_cast<double>(lanes.size());

    TraceLog log;
    log.tau = tau;
    log.density_level = density_level_for(density);

    int next_id = 1;
    auto record_tick = [&](double t) {
        TraceTick tick{t, {}};
        for (const auto& lane : lanes) {
            for (const auto& c : lane.cars) {
                VehicleState s;
                s.id = c.id;
                s.position = lane_world_pos(map, lane, c.progress);
                s.velocity = lane_velocity(map, lane, c.speed);
                s.antenna_height = c.antenna_height;
                s.vclass = c.vclass;
                tick.states.push_back(s);
            }
        }
        std::sort(tick.states.begin(), tick.states.end(),
                  [](const VehicleState& a, const VehicleState& b) { return a.id < b.id; });
        tick.time = t;
        log.ticks.push_back(std::move(tick));
    };

    // let the network fill before the recorded window starts
    int warmup_steps = static_cast<int>(std::lround(params.warmup / dt));
    for (int step = -warmup_steps; step <= total_steps; ++step) {
        double t = step * dt;
        if (step >= 0 && step % steps_per_tick == 0) record_tick(t);
        if (step == total_steps) break;

        // arrivals at each lane entry
        for (auto& lane : lanes) {
            if (rng.uniform() >= per_entry * dt) continue;
            if (!lane_clear_around(lane, 0.0, params.min_headway + 5.0)) continue;
            SimCar car;
            car.id = next_id++;
            car.progress = 0.0;
            car.prev_progress = 0.0;
            car.speed = params.speed_limit;
            bool truck = rng.uniform() < params.truck_fraction;
            car.vclass = truck ? VehicleClass::truck_bus : VehicleClass::passenger;
            car.antenna_height = truck ? params.truck_antenna : params.passenger_antenna;
            lane.cars.insert(lane.cars.begin(), car);
        }

        // car following: synchronous speed update against the current leader gap
        for (auto& lane : lanes) {
            for (std::size_t ci = 0; ci < lane.cars.size(); ++ci) {
                SimCar& c = lane.cars[ci];
                double gap = std::numeric_limits<double>::infinity();
                if (ci + 1 < lane.cars.size()) gap = lane.cars[ci + 1].progress - c.progress;
                double v = std::min(c.speed + params.max_accel * dt, params.speed_limit);
                if (std::isfinite(gap))
                    v = std::min(v, std::max(0.0, gap - params.min_headway) / dt);
                c.prev_progress = c.progress;
                c.speed = v;
            }
            for (auto& c : lane.cars) c.progress = c.prev_progress + c.speed * dt;
        }

        // junction turns and boundary exits (iterated in fixed lane/car order)
        for (int li = 0; li < static_cast<int>(lanes.size()); ++li) {
            auto& lane = lanes[li];
            for (std::size_t ci = 0; ci < lane.cars.size();) {
                SimCar& car = lane.cars[ci];
                if (car.progress > lane.length) {
                    lane.cars.erase(lane.cars.begin() + ci);
                    continue;
                }
                // first junction crossed during this step, if any
                int hit = -1;
                for (std::size_t k = 0; k < lane.junction_progress.size(); ++k) {
                    double jp = lane.junction_progress[k];
                    if (car.prev_progress < jp && jp <= car.progress) {
                        hit = static_cast<int>(k);
                        break;
                    }
                }
                if (hit >= 0) {
                    // exits: straight plus the two directions of the crossing road
                    int cross = lane.junction_road[hit];
                    int exit = static_cast<int>(rng.uniform_int(3));  // 0: straight
                    if (exit != 0) {
                        int tdir = exit == 1 ? 1 : -1;
                        int target_idx = -1;
                        for (int lj = 0; lj < static_cast<int>(lanes.size()); ++lj)
                            if (lanes[lj].road_idx == cross && lanes[lj].dir == tdir)
                                target_idx = lj;
                        const auto& here = map.roads[lane.road_idx];
                        double coord_on_cross = here.vertical() ? here.a.x : here.a.y;
                        auto& target = lanes[target_idx];
                        double overshoot = car.progress - lane.junction_progress[hit];
                        double tp = axis_coord_to_progress(target, coord_on_cross) + overshoot;
                        if (tp >= 0.0 && tp < target.length &&
                            lane_clear_around(target, tp, params.min_headway + 2.0)) {
                            SimCar moved = car;
                            moved.progress = tp;
                            moved.prev_progress = tp;
                            lane.cars.erase(lane.cars.begin() + ci);
                            auto it = std::upper_bound(target.cars.begin(), target.cars.end(),
                                                       moved,
                                                       [](const SimCar& a, const SimCar& b) {
                                                           return a.progress < b.progress;
                                                       });
                            target.cars.insert(it, moved);
                            continue;
                        }
                    }
                }
                ++ci;
            }
        }
    }
    return log;
}

std::vector<VehicleState> states_at(const TraceLog& log, double t) {
    if (log.ticks.empty()) return {};
    if (t <= log.ticks.front().time) return log.ticks.front().states;
    if (t >= log.ticks.back().time) return log.ticks.back().states;
    std::size_t hi = 1;
    while (hi < log.ticks.size() && log.ticks[hi].time < t) ++hi;
    const auto& t0 = log.ticks[hi - 1];
    const auto& t1 = log.ticks[hi];
    if (t == t1.time) return t1.states;
    double f = (t - t0.time) / (t1.time - t0.time);
    std::map<int, const VehicleState*> later;
    for (const auto& s : t1.states) later[s.id] = &s;
    std::vector<VehicleState> out;
    for (const auto& s0 : t0.states) {
        auto it = later.find(s0.id);
        if (it == later.end()) continue;
        const auto& s1 = *it->second;
        VehicleState s = s0;
        s.position = s0.position + (s1.position - s0.position) * f;
        s.velocity = s0.velocity + (s1.velocity - s0.velocity) * f;
        out.push_back(s);
    }
    return out;
}

void export_traces(const TraceLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_traces: cannot open " + path);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "# rope-trace density=%s tau=%.17g ticks=%zu\n",
                  to_string(log.density_level), log.tau, log.ticks.size());
    out << buf << "t,id,x,y,vx,vy,h,class\n";
    for (const auto& tick : log.ticks) {
        for (const auto& s : tick.states) {
            std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                          tick.time, s.id, s.position.x, s.position.y, s.velocity.x,
                          s.velocity.y, s.antenna_height, to_string(s.vclass));
            out << buf;
        }
    }
}

TraceLog import_traces(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_traces: cannot open " + path);
    TraceLog log;
    std::string line;
    int lineno = 0;
    std::size_t declared_ticks = 0;
    bool have_meta = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "density") log.density_level = density_from_string(val);
                else if (key == "tau") log.tau = std::stod(val);
                else if (key == "ticks") declared_ticks = std::stoul(val);
            }
            have_meta = true;
            continue;
        }
        if (line.rfind("t,id", 0) == 0) continue;  // header
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 8)
            throw std::runtime_error("import_traces: line " + std::to_string(lineno) +
                                     ": expected 8 fields, got " + std::to_string(fields.size()));
        VehicleState s;
        double t;
        try {
            t = std::stod(fields[0]);
            s.id = std::stoi(fields[1]);
            s.position = {std::stod(fields[2]), std::stod(fields[3])};
            s.velocity = {std::stod(fields[4]), std::stod(fields[5])};
            s.antenna_height = std::stod(fields[6]);
        } catch (const std::exception&) {
            throw std::runtime_error("import_traces: line " + std::to_string(lineno) +
                                     ": malformed numeric field");
        }
        if (fields[7] == "passenger") s.vclass = VehicleClass::passenger;
        else if (fields[7] == "truck_bus") s.vclass = VehicleClass::truck_bus;
        else
            throw std::runtime_error("import_traces: line " + std::to_string(lineno) +
                                     ": unknown vehicle class " + fields[7]);
        std::size_t idx = static_cast<std::size_t>(std::lround(t / log.tau));
        while (log.ticks.size() <= idx)
            log.ticks.push_back({static_cast<double>(log.ticks.size()) * log.tau, {}});
        log.ticks[idx].time = t;
        log.ticks[idx].states.push_back(s);
    }
    if (have_meta) {
        while (log.ticks.size() < declared_ticks)
            log.ticks.push_back({static_cast<double>(log.ticks.size()) * log.tau, {}});
    }
    return log;
}

void export_map(const WorldMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_map: cannot open " + path);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "extent %.17g %.17g\n", map.extent_x, map.extent_y);
    out << "# rope-map\n" << buf;
    for (const auto& r : map.roads) {
        std::snprintf(buf, sizeof(buf), "road %.17g %.17g %.17g %.17g %.17g %d\n", r.a.x, r.a.y,
                      r.b.x, r.b.y, r.width, r.lanes);
        out << buf;
    }
    for (const auto& b : map.buildings) {
        std::snprintf(buf, sizeof(buf), "building %.17g %.17g %.17g %.17g\n", b.xmin, b.ymin,
                      b.xmax, b.ymax);
        out << buf;
    }
    for (const auto& s : map.bs_sites) {
        std::snprintf(buf, sizeof(buf), "bs %.17g %.17g %.17g %.17g\n", s.position.x,
                      s.position.y, s.antenna_height, s.tx_power_dbm);
        out << buf;
    }
}

WorldMap import_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_map: cannot open " + path);
    WorldMap map;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string kind;
        ss >> kind;
        bool ok = true;
        if (kind == "extent") {
            ok = static_cast<bool>(ss >> map.extent_x >> map.extent_y);
        } else if (kind == "road") {
            RoadSegment r;
            ok = static_cast<bool>(ss >> r.a.x >> r.a.y >> r.b.x >> r.b.y >> r.width >> r.lanes);
            map.roads.push_back(r);
        } else if (kind == "building") {
            Rect b;
            ok = static_cast<bool>(ss >> b.xmin >> b.ymin >> b.xmax >> b.ymax);
            map.buildings.push_back(b);
        } else if (kind == "bs") {
            BsSite s;
            ok = static_cast<bool>(
                ss >> s.position.x >> s.position.y >> s.antenna_height >> s.tx_power_dbm);
            map.bs_sites.push_back(s);
        } else {
            ok = false;
        }
        if (!ok)
            throw std::runtime_error("import_map: line " + std::to_string(lineno) +
                                     ": malformed stanza");
    }
    return map;
}

}  // namespace rope
