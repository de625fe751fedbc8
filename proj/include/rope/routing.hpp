#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rope/metrics.hpp"

namespace rope {

// Undirected routing graph; edge weights are link strength (width) and link
// connectivity.
struct Graph {
    struct HalfEdge {
        int to;
        double strength;
        double connectivity;
    };
    int n = 0;
    std::vector<std::vector<HalfEdge>> adj;

    explicit Graph(int nodes = 0) : n(nodes), adj(nodes) {}
    void add_edge(int u, int v, double strength, double connectivity);
    const HalfEdge* find_edge(int u, int v) const;
    int edge_count() const;
};

struct RoutingParams {
    double connectivity_min = 0.999;  // C_th
    int hop_max = 6;                  // H_th
    double gamma_th = -80.0;          // dBm
    double gamma_max = -10.0;         // dBm
};

enum class PathRank { J1, J2, J3, mended, direct };
const char* to_string(PathRank rank);

struct RankedPath {
    std::vector<int> nodes;  // s .. d, simple
    PathMetrics metrics;
    PathRank rank = PathRank::J1;
};

// Path width label; the source carries a distinguished maximal value rather
// than a float infinity.
struct PathWidth {
    bool maximal = false;
    double value = 0.0;

    static PathWidth max() { return {true, 0.0}; }
    static PathWidth zero() { return {false, 0.0}; }
    PathWidth meet(double edge_width) const {
        if (maximal) return {false, edge_width};
        return {false, std::min(value, edge_width)};
    }
    bool operator>(const PathWidth& o) const {
        if (maximal != o.maximal) return maximal;
        if (maximal) return false;
        return value > o.value;
    }
    bool operator<(const PathWidth& o) const { return o > *this; }
};

constexpr int kUnreachable = 1 << 20;  // backward label for disconnected nodes

struct PrunedGraph {
    Graph graph;
    std::vector<int> removed_nodes;  // isolated after pruning
};

// Drop edges with connectivity <= C_th (strict keep-if-greater), then flag
// isolated nodes.
PrunedGraph prune(const Graph& g, double connectivity_min);

// Exact least hop count from every node to d (BFS; hop weights are all 1).
std::vector<int> backward_dijkstra(const Graph& g, int d);

struct ForwardResult {
    bool reached = false;
    std::vector<int> path;  // s .. d when reached
    double width = 0.0;
    int hops = 0;
};

// Width-maximizing search with hop-feasibility lookahead from the backward
// labels; the heuristic half of WFPF.
ForwardResult forward_dijkstra(const Graph& g, int s, int d, int hop_max,
                               const std::vector<int>& backward);

std::optional<RankedPath> wfpf(const Graph& g, int s, int d, int hop_max);

// Record of one internal forward search, for oracle cross-checks.
struct SearchTrace {
    Graph masked;
    int source;
    int budget;
    std::optional<double> found_width;
};

// Deviation-path state carried across dpr_next calls. The candidate pool
// persists and is deduplicated by node sequence.
struct DprState {
    struct Candidate {
        std::vector<int> nodes;
        PathMetrics metrics;
    };
    std::vector<RankedPath> established;
    std::vector<Candidate> pool;
    std::set<std::vector<int>> seen;
    std::vector<SearchTrace>* trace = nullptr;
};

std::optional<RankedPath> dpr_next(const Graph& g, int s, int d, int hop_max, DprState& state);

// prune -> wfpf -> dpr_next x2. Caller passes the unpruned topology graph.
std::vector<RankedPath> tora_top3(const Graph& g, int s, int d, const RoutingParams& params,
                                  std::vector<SearchTrace>* trace = nullptr);

// Exact restricted-widest-path solver: DP over (node, hops used), hops < hop_max.
struct OracleResult {
    double width = 0.0;
    std::vector<int> path;
};
std::optional<OracleResult> oracle_widest_hop_bounded(const Graph& g, int s, int d, int hop_max);

// Exhaustive simple-path enumeration, for graphs small enough to afford it.
struct EnumeratedPath {
    std::vector<int> nodes;
    double width = 0.0;
    int hops = 0;
};
std::vector<EnumeratedPath> enumerate_feasible_paths(const Graph& g, int s, int d, int hop_max);

// CAR: bottleneck-connectivity path (max-min l_C), ties broken by fewer hops.
std::optional<RankedPath> baseline_car(const Graph& g, int s, int d);

PathMetrics metrics_along(const Graph& g, const std::vector<int>& nodes);
bool is_simple(const std::vector<int>& nodes);

void export_graph(const Graph& g, const std::string& path);
Graph import_graph(const std::string& path);

}  // namespace rope
