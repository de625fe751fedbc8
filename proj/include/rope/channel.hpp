#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rope/geometry.hpp"
#include "rope/scenario.hpp"

namespace rope {

enum class LinkClass { LOS, NLOSb, NLOSv };
enum class LinkType { V2I, V2V };

const char* to_string(LinkClass c);
const char* to_string(LinkType t);

// One database item as collected by the cloud server.
struct LinkRecord {
    LinkType type = LinkType::V2I;
    int tx_id = -1;
    int rx_id = -1;  // BS index for V2I rows
    double x_t = 0, y_t = 0, h_t = 0, v_t = 0;
    double x_r = 0, y_r = 0, h_r = 0, v_r = 0;
    double rss = 0;
    DensityLevel density = DensityLevel::low;
};

// Parametric simplification of an outline-based geometric channel. The
// class ordering (LOS better than NLOSv better than NLOSb) is what matters;
// the numbers are configuration, not claims.
struct ChannelParams {
    double ref_loss_db = 44.5;  // 1 m intercept
    double exp_los = 2.0;
    double exp_nlosv = 2.4;
    double exp_nlosb = 2.8;
    double shadow_sigma_los = 2.0;
    double shadow_sigma_nlosv = 3.0;
    double shadow_sigma_nlosb = 5.0;
    double wall_loss_db = 15.0;
    double blocker_loss_db = 4.0;
    int blocker_cap = 3;
    double rss_max_dbm = -10.0;  // gamma_M
    double fresnel_margin = 0.3;
    double body_height_passenger = 1.5;
    double body_height_truck = 3.5;
    double outline_passenger_len = 4.5, outline_passenger_wid = 1.8;
    double outline_truck_len = 10.0, outline_truck_wid = 2.5;
    double shadow_cell = 100.0;  // m, decorrelation cell of the shadowing field
};

struct LinkClassification {
    LinkClass cls = LinkClass::LOS;
    int n_blockers = 0;
};

// Geometric LOS / NLOSb / NLOSv classification. Endpoint vehicles are
// excluded from the blocker scan by id.
LinkClassification classify_link(const Vec2& tx_pos, double tx_height, const Vec2& rx_pos,
                                 double rx_height, const WorldMap& map,
                                 const std::vector<VehicleState>& vehicles, int tx_id, int rx_id,
                                 const ChannelParams& params = {});

// Log-distance path loss plus a keyed shadowing draw, clamped to rss_max.
double ground_truth_rss(LinkClass cls, double distance_3d, double tx_power_dbm, int n_blockers,
                        std::uint64_t seed_stream, const ChannelParams& params = {});

// Shadowing stream key: symmetric in the endpoint ids and quantized to the
// spatial cell of the link midpoint, so nearby times see the same draw.
std::uint64_t shadow_stream_key(std::uint64_t scenario_seed, int id_a, int id_b,
                                const Vec2& midpoint, const ChannelParams& params = {});

// Classify + measure in one call; the full ground-truth oracle.
double true_link_rss(const Vec2& tx_pos, double tx_height, int tx_id, const Vec2& rx_pos,
                     double rx_height, int rx_id, double tx_power_dbm, const WorldMap& map,
                     const std::vector<VehicleState>& vehicles, std::uint64_t scenario_seed,
                     const ChannelParams& params = {});

// Number of other vehicles strictly within `radius` of v.
int density_context(const VehicleState& v, const std::vector<VehicleState>& vehicles,
                    double radius);

void export_link_db(const std::vector<LinkRecord>& db, const std::string& path);
std::vector<LinkRecord> import_link_db(const std::string& path);

}  // namespace rope
