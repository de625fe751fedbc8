#include "rope/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rope/rng.hpp"

namespace rope {

const char* to_string(LinkClass c) {
    switch (c) {
        case LinkClass::LOS: return "LOS";
        case LinkClass::NLOSb: return "NLOSb";
        default: return "NLOSv";
    }
}

const char* to_string(LinkType t) { return t == LinkType::V2I ? "V2I" : "V2V"; }

LinkClassification classify_link(const Vec2& tx_pos, double tx_height, const Vec2& rx_pos,
                                 double rx_height, const WorldMap& map,
                                 const std::vector<VehicleState>& vehicles, int tx_id, int rx_id,
                                 const ChannelParams& params) {
    for (const auto& b : map.buildings)
        if (segment_intersects_rect(tx_pos, rx_pos, b)) return {LinkClass::NLOSb, 0};

    double clearance = std::max(tx_height, rx_height) + params.fresnel_margin;
    int blockers = 0;
    for (const auto& v : vehicles) {
        if (v.id == tx_id || v.id == rx_id) continue;
        double body = v.vclass == VehicleClass::truck_bus ? params.body_height_truck
                                                          : params.body_height_passenger;
        if (body < clearance) continue;
        double half_len = (v.vclass == VehicleClass::truck_bus ? params.outline_truck_len
                                                               : params.outline_passenger_len) /
                          2.0;
        double half_wid = (v.vclass == VehicleClass::truck_bus ? params.outline_truck_wid
                                                               : params.outline_passenger_wid) /
                          2.0;
        Vec2 axis = v.velocity.norm() > 0.0 ? v.velocity : Vec2{1.0, 0.0};
        if (segment_intersects_obb(tx_pos, rx_pos, v.position, axis, half_len, half_wid))
            ++blockers;
    }
    if (blockers > 0) return {LinkClass::NLOSv, blockers};
    return {LinkClass::LOS, 0};
}

double ground_truth_rss(LinkClass cls, double distance_3d, double tx_power_dbm, int n_blockers,
                        std::uint64_t seed_stream, const ChannelParams& params) {
    if (!(distance_3d > 0.0)) throw std::invalid_argument("ground_truth_rss: distance must be > 0");
    double exponent, sigma, extra = 0.0;
    switch (cls) {
        case LinkClass::LOS:
            exponent = params.exp_los;
            sigma = params.shadow_sigma_los;
            break;
        case LinkClass::NLOSv:
            exponent = params.exp_nlosv;
            sigma = params.shadow_sigma_nlosv;
            extra = params.blocker_loss_db * std::min(n_blockers, params.blocker_cap);
            break;
        default:
            exponent = params.exp_nlosb;
            sigma = params.shadow_sigma_nlosb;
            extra = params.wall_loss_db;
            break;
    }
    double path_loss = params.ref_loss_db + 10.0 * exponent * std::log10(distance_3d) + extra;
    double shadow = sigma * keyed_normal(seed_stream);
    return std::min(tx_power_dbm - path_loss - shadow, params.rss_max_dbm);
}

std::uint64_t shadow_stream_key(std::uint64_t scenario_seed, int id_a, int id_b,
                                const Vec2& midpoint, const ChannelParams& params) {
    int lo = std::min(id_a, id_b), hi = std::max(id_a, id_b);
    std::int64_t cx = static_cast<std::int64_t>(std::floor(midpoint.x / params.shadow_cell));
    std::int64_t cy = static_cast<std::int64_t>(std::floor(midpoint.y / params.shadow_cell));
    std::uint64_t k = hash_combine(scenario_seed, static_cast<std::uint64_t>(lo) + 0x10000ULL);
    k = hash_combine(k, static_cast<std::uint64_t>(hi) + 0x20000ULL);
    k = hash_combine(k, static_cast<std::uint64_t>(cx + (1LL << 32)));
    k = hash_combine(k, static_cast<std::uint64_t>(cy + (1LL << 32)));
    return k;
}

double true_link_rss(const Vec2& tx_pos, double tx_height, int tx_id, const Vec2& rx_pos,
                     double rx_height, int rx_id, double tx_power_dbm, const WorldMap& map,
                     const std::vector<VehicleState>& vehicles, std::uint64_t scenario_seed,
                     const ChannelParams& params) {
    auto cl = classify_link(tx_pos, tx_height, rx_pos, rx_height, map, vehicles, tx_id, rx_id,
                            params);
    double d2 = distance(tx_pos, rx_pos);
    double dh = tx_height - rx_height;
    double d3 = std::max(std::sqrt(d2 * d2 + dh * dh), 0.5);
    Vec2 mid = (tx_pos + rx_pos) * 0.5;
    std::uint64_t key = shadow_stream_key(scenario_seed, tx_id, rx_id, mid, params);
    return ground_truth_rss(cl.cls, d3, tx_power_dbm, cl.n_blockers, key, params);
}

int density_context(const VehicleState& v, const std::vector<VehicleState>& vehicles,
                    double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("density_context: radius must be > 0");
    int count = 0;
    for (const auto& o : vehicles) {
        if (o.id == v.id) continue;
        if (distance(o.position, v.position) < radius) ++count;
    }
    return count;
}

void export_link_db(const std::vector<LinkRecord>& db, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_link_db: cannot open " + path);
    out << "type,tx_id,rx_id,x_t,y_t,h_t,v_t,x_r,y_r,h_r,v_r,rss,density\n";
    char buf[320];
    for (const auto& r : db) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                      to_string(r.type), r.tx_id, r.rx_id, r.x_t, r.y_t, r.h_t, r.v_t, r.x_r,
                      r.y_r, r.h_r, r.v_r, r.rss, to_string(r.density));
        out << buf;
    }
}

std::vector<LinkRecord> import_link_db(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_link_db: cannot open " + path);
    std::vector<LinkRecord> db;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("type,", 0) == 0) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 13)
            throw std::runtime_error("import_link_db: line " + std::to_string(lineno) +
                                     ": expected 13 fields");
        LinkRecord r;
        if (f[0] == "V2I") r.type = LinkType::V2I;
        else if (f[0] == "V2V") r.type = LinkType::V2V;
        else
            throw std::runtime_error("import_link_db: line " + std::to_string(lineno) +
                                     ": unknown link type " + f[0]);
        try {
            r.tx_id = std::stoi(f[1]);
            r.rx_id = std::stoi(f[2]);
            r.x_t = std::stod(f[3]);
            r.y_t = std::stod(f[4]);
            r.h_t = std::stod(f[5]);
            r.v_t = std::stod(f[6]);
            r.x_r = std::stod(f[7]);
            r.y_r = std::stod(f[8]);
            r.h_r = std::stod(f[9]);
            r.v_r = std::stod(f[10]);
            r.rss = std::stod(f[11]);
        } catch (const std::exception&) {
            throw std::runtime_error("import_link_db: line " + std::to_string(lineno) +
                                     ": malformed numeric field");
        }
        if (f[12] == "low") r.density = DensityLevel::low;
        else if (f[12] == "medium") r.density = DensityLevel::medium;
        else if (f[12] == "high") r.density = DensityLevel::high;
        else
            throw std::runtime_error("import_link_db: line " + std::to_string(lineno) +
                                     ": unknown density " + f[12]);
        db.push_back(r);
    }
    return db;
}

}  // namespace rope
