#include "rope/warning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rope {

const char* to_string(WarningCause cause) {
    switch (cause) {
        case WarningCause::low_strength: return "low_strength";
        case WarningCause::out_of_coverage: return "out_of_coverage";
        default: return "none";
    }
}

WarningDecision check_warning(int vue_id, const StrengthDistribution& dist,
                              const Vec2& predicted_pos, const std::optional<Vec2>& bs_pos,
                              double gamma_th, double coverage_range) {
    if (!(dist.var >= 0.0)) throw std::invalid_argument("check_warning: negative variance");
    WarningDecision d;
    d.vue_id = vue_id;
    d.mu = dist.mu;
    d.sigma = std::sqrt(dist.var);
    if (!bs_pos || distance(predicted_pos, *bs_pos) > coverage_range) {
        d.triggered = true;
        d.cause = WarningCause::out_of_coverage;
    } else if (d.mu - d.sigma <= gamma_th) {
        d.triggered = true;
        d.cause = WarningCause::low_strength;
    }
    return d;
}

int VirtualTopology::node_of(int vue_id) const {
    for (std::size_t i = 0; i < vue_ids.size(); ++i)
        if (vue_ids[i] == vue_id) return static_cast<int>(i);
    return -1;
}

EdgeMetrics edge_metrics_for(double mu, const Vec2& pos_a, const Vec2& vel_a, const Vec2& pos_b,
                             const Vec2& vel_b, double range, const TopologyParams& params) {
    EdgeMetrics m;
    m.strength = normalized_strength(std::min(mu, params.gamma_max), params.gamma_th,
                                     params.gamma_max);
    auto k = relative_kinematics(pos_a, vel_a, pos_b, vel_b, range);
    m.connectivity = link_connectivity(link_duration(k), params.tau);
    m.hop = 1;
    return m;
}

VirtualTopology build_virtual_topology(const std::vector<PredictedVue>& vues,
                                       const std::vector<BsSite>& bs_sites,
                                       const V2vInference& v2v_model, const TopologyParams& params,
                                       double snapshot_time) {
    VirtualTopology topo;
    int n = static_cast<int>(vues.size());
    topo.graph = Graph(n + 1);
    topo.bs_node = n;
    topo.snapshot_time = snapshot_time;
    topo.vue_ids.resize(n);
    topo.bs_of.resize(n);
    for (int i = 0; i < n; ++i) {
        topo.vue_ids[i] = vues[i].id;
        topo.bs_of[i] = vues[i].bs_index;
    }

    static const Vec2 kStill{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const auto& v = vues[i];
        if (!v.bs_index || !v.v2i) continue;
        const auto& bs = bs_sites.at(static_cast<std::size_t>(*v.bs_index));
        if (distance(v.position, bs.position) > params.d_i) continue;
        if (!(v.v2i->mu > params.gamma_th)) continue;
        auto m = edge_metrics_for(v.v2i->mu, v.position, v.velocity, bs.position, kStill,
                                  params.d_i, params);
        topo.graph.add_edge(i, topo.bs_node, m.strength, m.connectivity);
    }

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const auto& a = vues[i];
            const auto& b = vues[j];
            if (!(distance(a.position, b.position) < params.d_v)) continue;
            StrengthDistribution dist = v2v_model(a, b);
            if (!(dist.mu > params.gamma_th)) continue;
            auto m = edge_metrics_for(dist.mu, a.position, a.velocity, b.position, b.velocity,
                                      params.d_v, params);
            topo.graph.add_edge(i, j, m.strength, m.connectivity);
        }
    return topo;
}

}  // namespace rope
