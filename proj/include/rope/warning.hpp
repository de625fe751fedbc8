#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rope/predictor.hpp"
#include "rope/routing.hpp"

namespace rope {

enum class WarningCause { none, low_strength, out_of_coverage };
const char* to_string(WarningCause cause);

struct WarningDecision {
    int vue_id = -1;
    bool triggered = false;
    WarningCause cause = WarningCause::none;
    double mu = 0.0;
    double sigma = 0.0;
};

// One vehicle's predicted situation at t+tau: extrapolated state, the serving
// BS (if any), and the inferred V2I strength toward it.
struct PredictedVue {
    int id = -1;
    Vec2 position;
    Vec2 velocity;
    double antenna_height = 1.6;
    std::optional<int> bs_index;
    std::optional<StrengthDistribution> v2i;
};

// Pessimistic trigger (mu - sigma) against the threshold; losing coverage
// outranks weak strength when both hold.
WarningDecision check_warning(int vue_id, const StrengthDistribution& dist,
                              const Vec2& predicted_pos, const std::optional<Vec2>& bs_pos,
                              double gamma_th, double coverage_range);

struct TopologyParams {
    double gamma_th = -80.0;
    double gamma_max = -10.0;
    double d_i = 400.0;  // BS coverage range, m
    double d_v = 300.0;  // VUE-to-VUE range, m
    double tau = 1.0;
};

// Predicted communication graph at t+tau. Node i < vues.size() is vues[i];
// the last node stands for all base stations at once.
struct VirtualTopology {
    Graph graph{0};
    std::vector<int> vue_ids;                 // graph index -> vehicle id
    std::vector<std::optional<int>> bs_of;    // graph index -> serving BS
    int bs_node = 0;
    double snapshot_time = 0.0;

    int node_of(int vue_id) const;
};

using V2vInference = std::function<StrengthDistribution(const PredictedVue&, const PredictedVue&)>;

// V2I edges for in-coverage VUEs whose inferred mean clears the threshold;
// V2V edges for pairs predicted closer than d_v, admitted on the inferred
// mean. The V2V model is only consulted for in-range pairs.
VirtualTopology build_virtual_topology(const std::vector<PredictedVue>& vues,
                                       const std::vector<BsSite>& bs_sites,
                                       const V2vInference& v2v_model, const TopologyParams& params,
                                       double snapshot_time);

// Edge annotation shared by both link kinds: strength from the inferred mean
// (clamped to gamma_max), connectivity from predicted kinematics.
EdgeMetrics edge_metrics_for(double mu, const Vec2& pos_a, const Vec2& vel_a, const Vec2& pos_b,
                             const Vec2& vel_b, double range, const TopologyParams& params);

}  // namespace rope
