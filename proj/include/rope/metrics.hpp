#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rope/geometry.hpp"

namespace rope {

// Per-edge QoS metrics of the virtual topology. hop is always 1; kept as a
// field so path aggregation reads uniformly.
struct EdgeMetrics {
    double strength = 0.0;      // l_S in (0,1]
    double connectivity = 0.0;  // l_C in (0,1]
    int hop = 1;                // l_H
};

// Scalar relative kinematics of a node pair: displacement magnitude,
// relative speed, the angle between the B->A direction and the relative
// velocity, and the communication range (d_I or d_V).
struct RelativeKinematics {
    double displacement = 0.0;  // meters, >= 0
    double speed = 0.0;         // m/s, >= 0
    double angle = 0.0;         // radians in [0, pi]
    double range = 0.0;         // meters
};

struct PathMetrics {
    double strength = 0.0;      // p_S = min edge strength
    double connectivity = 0.0;  // p_C = min edge connectivity
    int hops = 0;               // p_H = edge count
};

// Normalized link strength from an inferred mean RSS. Caller guarantees
// gamma_th < mu <= gamma_max (topology admission provides the lower bound).
inline double normalized_strength(double mu_dbm, double gamma_th, double gamma_max) {
    if (!(gamma_th < gamma_max))
        throw std::invalid_argument("normalized_strength: gamma_th must be < gamma_max");
    if (!(mu_dbm > gamma_th) || !(mu_dbm <= gamma_max))
        throw std::invalid_argument("normalized_strength: mu outside (gamma_th, gamma_max]");
    return (mu_dbm - gamma_th) / (gamma_max - gamma_th);
}

// Scalar kinematics of a node pair. The angle is measured between the
// direction from a toward b and the relative velocity of a, so 0 means
// closing head-on and pi means receding along the line of sight.
inline RelativeKinematics relative_kinematics(const Vec2& pos_a, const Vec2& vel_a,
                                              const Vec2& pos_b, const Vec2& vel_b, double range) {
    Vec2 toward = pos_b - pos_a;
    Vec2 rel = vel_a - vel_b;
    RelativeKinematics k;
    k.displacement = toward.norm();
    k.speed = rel.norm();
    k.range = range;
    if (k.displacement > 0.0 && k.speed > 0.0) {
        double c = toward.dot(rel) / (k.displacement * k.speed);
        k.angle = std::acos(std::clamp(c, -1.0, 1.0));
    }
    return k;
}

// Time until the pair leaves communication range, from point kinematics.
// nullopt means the pair never separates (zero relative speed).
inline std::optional<double> link_duration(const RelativeKinematics& k) {
    if (k.displacement < 0.0 || k.speed < 0.0 || k.range <= 0.0)
        throw std::invalid_argument("link_duration: negative kinematics");
    if (k.angle < 0.0 || k.angle > 3.14159265358979323846 + 1e-12)
        throw std::invalid_argument("link_duration: angle outside [0, pi]");
    if (k.displacement > k.range)
        throw std::invalid_argument("link_duration: nodes already out of range");
    if (k.speed == 0.0) return std::nullopt;
    double s = std::sin(k.angle);
    double c = std::cos(k.angle);
    double under = k.range * k.range - k.displacement * k.displacement * s * s;
    double t = (std::sqrt(std::max(under, 0.0)) + k.displacement * c) / k.speed;
    return std::max(t, 0.0);
}

// Duration normalized against the collection period tau.
inline double link_connectivity(std::optional<double> duration, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("link_connectivity: tau must be > 0");
    if (!duration.has_value()) return 1.0;
    if (*duration < 0.0) throw std::invalid_argument("link_connectivity: negative duration");
    return std::min(*duration / tau, 1.0);
}

// Concave rule for strength and connectivity, additive rule for hops.
inline PathMetrics path_metrics(const std::vector<EdgeMetrics>& edges) {
    if (edges.empty()) throw std::invalid_argument("path_metrics: empty edge list");
    PathMetrics m{edges[0].strength, edges[0].connectivity, 0};
    for (const auto& e : edges) {
        m.strength = std::min(m.strength, e.strength);
        m.connectivity = std::min(m.connectivity, e.connectivity);
        m.hops += e.hop;
    }
    return m;
}

}  // namespace rope
