#include "rope/routing.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rope {

const char* to_string(PathRank rank) {
    switch (rank) {
        case PathRank::J1: return "J1";
        case PathRank::J2: return "J2";
        case PathRank::J3: return "J3";
        case PathRank::mended: return "mended";
        default: return "direct";
    }
}

void Graph::add_edge(int u, int v, double strength, double connectivity) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("add_edge: node out of range");
    if (u == v) throw std::invalid_argument("add_edge: self-loop");
    if (find_edge(u, v)) throw std::invalid_argument("add_edge: parallel edge");
    adj[u].push_back({v, strength, connectivity});
    adj[v].push_back({u, strength, connectivity});
}

const Graph::HalfEdge* Graph::find_edge(int u, int v) const {
    for (const auto& e : adj[u])
        if (e.to == v) return &e;
    return nullptr;
}

int Graph::edge_count() const {
    int c = 0;
    for (const auto& a : adj) c += static_cast<int>(a.size());
    return c / 2;
}

bool is_simple(const std::vector<int>& nodes) {
    std::set<int> seen(nodes.begin(), nodes.end());
    return seen.size() == nodes.size();
}

PathMetrics metrics_along(const Graph& g, const std::vector<int>& nodes) {
    std::vector<EdgeMetrics> edges;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const auto* e = g.find_edge(nodes[i], nodes[i + 1]);
        if (!e) throw std::invalid_argument("metrics_along: missing edge");
        edges.push_back({e->strength, e->connectivity, 1});
    }
    return path_metrics(edges);
}

PrunedGraph prune(const Graph& g, double connectivity_min) {
    PrunedGraph out{Graph(g.n), {}};
    for (int u = 0; u < g.n; ++u)
        for (const auto& e : g.adj[u])
            if (u < e.to && e.connectivity > connectivity_min)
                out.graph.add_edge(u, e.to, e.strength, e.connectivity);
    for (int u = 0; u < g.n; ++u)
        if (out.graph.adj[u].empty() && !g.adj[u].empty()) out.removed_nodes.push_back(u);
    return out;
}

std::vector<int> backward_dijkstra(const Graph& g, int d) {
    if (d < 0 || d >= g.n) throw std::invalid_argument("backward_dijkstra: node out of range");
    std::vector<int> b(g.n, kUnreachable);
    std::deque<int> queue{d};
    b[d] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (const auto& e : g.adj[u])
            if (b[e.to] == kUnreachable) {
                b[e.to] = b[u] + 1;
                queue.push_back(e.to);
            }
    }
    return b;
}

ForwardResult forward_dijkstra(const Graph& g, int s, int d, int hop_max,
                               const std::vector<int>& backward) {
    std::vector<PathWidth> w(g.n, PathWidth::zero());
    std::vector<int> f(g.n, 0), pi(g.n, -1);
    std::vector<bool> visited(g.n, false);
    w[s] = PathWidth::max();

    for (int round = 0; round < g.n; ++round) {
        int u = -1;
        for (int v = 0; v < g.n; ++v) {
            if (visited[v]) continue;
            if (u == -1 || w[v] > w[u]) u = v;
        }
        if (u == -1) break;
        visited[u] = true;
        for (const auto& e : g.adj[u]) {
            int v = e.to;
            if (visited[v]) continue;
            PathWidth wt = w[u].meet(e.strength);
            int ft = f[u] + 1;
            int bt = backward[v];
            // preference rule: width first, subject to hop feasibility, then
            // the smaller feasibility sum
            bool adopt;
            if (wt > w[v] && ft + bt < hop_max) adopt = true;
            else if (wt < w[v] && f[v] + backward[v] < hop_max) adopt = false;
            else if (ft + bt < f[v] + backward[v]) adopt = true;
            else adopt = false;
            if (adopt) {
                w[v] = wt;
                f[v] = ft;
                pi[v] = u;
            }
        }
    }

    ForwardResult res;
    if (s == d) {
        res.reached = true;
        res.path = {s};
        res.width = 0.0;
        res.hops = 0;
        return res;
    }
    if (pi[d] == -1) return res;
    res.hops = f[d];
    res.width = w[d].value;
    int cur = d;
    while (cur != -1) {
        res.path.push_back(cur);
        if (cur == s) break;
        cur = pi[cur];
    }
    std::reverse(res.path.begin(), res.path.end());
    res.reached = res.path.front() == s;
    return res;
}

std::optional<RankedPath> wfpf(const Graph& g, int s, int d, int hop_max) {
    if (s == d) throw std::invalid_argument("wfpf: source equals destination");
    if (s < 0 || d < 0 || s >= g.n || d >= g.n)
        throw std::invalid_argument("wfpf: node out of range");
    auto b = backward_dijkstra(g, d);
    if (b[s] >= hop_max) return std::nullopt;
    auto fr = forward_dijkstra(g, s, d, hop_max, b);
    if (!fr.reached || fr.hops >= hop_max) return std::nullopt;
    return RankedPath{fr.path, metrics_along(g, fr.path), PathRank::J1};
}

namespace {

// Subgraph with the given nodes removed and specific undirected edges masked.
Graph apply_mask(const Graph& g, const std::vector<bool>& node_removed,
                 const std::set<std::pair<int, int>>& edge_masked) {
    Graph out(g.n);
    for (int u = 0; u < g.n; ++u) {
        if (node_removed[u]) continue;
        for (const auto& e : g.adj[u]) {
            if (u >= e.to || node_removed[e.to]) continue;
            if (edge_masked.count({u, e.to})) continue;
            out.add_edge(u, e.to, e.strength, e.connectivity);
        }
    }
    return out;
}

std::pair<int, int> edge_key(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

bool candidate_better(const DprState::Candidate& a, const DprState::Candidate& b) {
    if (a.metrics.strength != b.metrics.strength) return a.metrics.strength > b.metrics.strength;
    if (a.metrics.hops != b.metrics.hops) return a.metrics.hops < b.metrics.hops;
    return a.nodes < b.nodes;
}

}  // namespace

std::optional<RankedPath> dpr_next(const Graph& g, int s, int d, int hop_max, DprState& state) {
    if (state.established.empty())
        throw std::invalid_argument("dpr_next: no established path to deviate from");
    const auto& newest = state.established.back().nodes;
    const auto& j1 = state.established.front().nodes;

    for (std::size_t i = 0; i + 1 < newest.size(); ++i) {
        int u = newest[i];
        int root_hops = static_cast<int>(i);
        int budget = hop_max - root_hops;
        if (budget < 1) continue;

        std::vector<bool> removed(g.n, false);
        for (std::size_t k = 0; k < i; ++k) removed[newest[k]] = true;
        std::set<std::pair<int, int>> masked;
        masked.insert(edge_key(u, newest[i + 1]));
        // when the root path is also a prefix of J1, mask the J1 outgoing link
        if (j1.size() > i + 1 && std::equal(newest.begin(), newest.begin() + i + 1, j1.begin()))
            masked.insert(edge_key(u, j1[i + 1]));

        Graph sub = apply_mask(g, removed, masked);
        auto b = backward_dijkstra(sub, d);
        std::optional<double> found;
        if (b[u] < budget) {
            auto fr = forward_dijkstra(sub, u, d, budget, b);
            if (fr.reached && fr.hops < budget) {
                found = fr.width;
                std::vector<int> complete(newest.begin(), newest.begin() + i);
                complete.insert(complete.end(), fr.path.begin(), fr.path.end());
                if (is_simple(complete) && !state.seen.count(complete)) {
                    bool dup = false;
                    for (const auto& c : state.pool)
                        if (c.nodes == complete) dup = true;
                    if (!dup)
                        state.pool.push_back({complete, metrics_along(g, complete)});
                }
            }
        }
        if (state.trace) state.trace->push_back({std::move(sub), u, budget, found});
    }

    if (state.pool.empty()) return std::nullopt;
    auto best = std::min_element(state.pool.begin(), state.pool.end(),
                                 [](const auto& a, const auto& b) { return candidate_better(a, b); });
    RankedPath out{best->nodes, best->metrics,
                   state.established.size() == 1 ? PathRank::J2 : PathRank::J3};
    state.pool.erase(best);
    state.seen.insert(out.nodes);
    state.established.push_back(out);
    return out;
}

std::vector<RankedPath> tora_top3(const Graph& g, int s, int d, const RoutingParams& params,
                                  std::vector<SearchTrace>* trace) {
    PrunedGraph pg = prune(g, params.connectivity_min);
    auto j1 = wfpf(pg.graph, s, d, params.hop_max);
    if (trace) {
        std::optional<double> w;
        if (j1) w = j1->metrics.strength;
        trace->push_back({pg.graph, s, params.hop_max, w});
    }
    if (!j1) return {};

    DprState state;
    state.trace = trace;
    state.established.push_back(*j1);
    state.seen.insert(j1->nodes);
    dpr_next(pg.graph, s, d, params.hop_max, state);
    if (state.established.size() == 2) dpr_next(pg.graph, s, d, params.hop_max, state);

    std::vector<RankedPath> out = state.established;
    // the two-directional search is a heuristic; keep the reported ranking
    // consistent with the strengths it actually found
    std::stable_sort(out.begin(), out.end(), [](const RankedPath& a, const RankedPath& b) {
        return a.metrics.strength > b.metrics.strength;
    });
    const PathRank ranks[3] = {PathRank::J1, PathRank::J2, PathRank::J3};
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = ranks[i];
    return out;
}

std::optional<OracleResult> oracle_widest_hop_bounded(const Graph& g, int s, int d, int hop_max) {
    if (s == d) throw std::invalid_argument("oracle: source equals destination");
    if (hop_max > 64) throw std::invalid_argument("oracle: hop bound too large");
    const double NEG = -std::numeric_limits<double>::infinity();
    const double POS = std::numeric_limits<double>::infinity();
    int hmax = std::max(hop_max - 1, 0);  // edges allowed
    // best[h][v]: max bottleneck using <= h edges
    std::vector<std::vector<double>> best(hmax + 1, std::vector<double>(g.n, NEG));
    std::vector<std::vector<int>> pred(hmax + 1, std::vector<int>(g.n, -1));
    best[0][s] = POS;
    for (int h = 1; h <= hmax; ++h) {
        best[h] = best[h - 1];
        for (int u = 0; u < g.n; ++u) {
            if (best[h - 1][u] == NEG) continue;
            for (const auto& e : g.adj[u]) {
                double cand = std::min(best[h - 1][u], e.strength);
                if (cand > best[h][e.to]) {
                    best[h][e.to] = cand;
                    pred[h][e.to] = u;
                }
            }
        }
    }
    if (hmax == 0 || best[hmax][d] == NEG) return std::nullopt;
    OracleResult res;
    res.width = best[hmax][d];
    // walk back through the DP, then shortcut any repeated nodes
    std::vector<int> walk{d};
    int cur = d, h = hmax;
    while (cur != s || h > 0) {
        while (h > 0 && best[h - 1][cur] == best[h][cur]) --h;
        if (cur == s && h == 0) break;
        int p = pred[h][cur];
        if (p == -1) break;
        walk.push_back(p);
        cur = p;
        --h;
    }
    std::reverse(walk.begin(), walk.end());
    std::vector<int> path;
    for (int node : walk) {
        auto it = std::find(path.begin(), path.end(), node);
        if (it != path.end()) path.erase(it + 1, path.end());
        else path.push_back(node);
    }
    res.path = path;
    return res;
}

std::vector<EnumeratedPath> enumerate_feasible_paths(const Graph& g, int s, int d, int hop_max) {
    std::vector<EnumeratedPath> out;
    std::vector<int> stack{s};
    std::vector<bool> on_path(g.n, false);
    on_path[s] = true;

    std::function<void(int, double)> dfs = [&](int u, double width) {
        if (u == d) {
            out.push_back({stack, width, static_cast<int>(stack.size()) - 1});
            return;
        }
        if (static_cast<int>(stack.size()) - 1 >= hop_max - 1) return;
        for (const auto& e : g.adj[u]) {
            if (on_path[e.to]) continue;
            on_path[e.to] = true;
            stack.push_back(e.to);
            dfs(e.to, std::min(width, e.strength));
            stack.pop_back();
            on_path[e.to] = false;
        }
    };
    dfs(s, std::numeric_limits<double>::infinity());
    return out;
}

std::optional<RankedPath> baseline_car(const Graph& g, int s, int d) {
    if (s == d) throw std::invalid_argument("baseline_car: source equals destination");
    // pass 1: bottleneck connectivity via widest-path Dijkstra
    std::vector<PathWidth> w(g.n, PathWidth::zero());
    std::vector<bool> visited(g.n, false);
    std::vector<int> pi(g.n, -1);
    w[s] = PathWidth::max();
    for (int round = 0; round < g.n; ++round) {
        int u = -1;
        for (int v = 0; v < g.n; ++v)
            if (!visited[v] && (u == -1 || w[v] > w[u])) u = v;
        if (u == -1) break;
        visited[u] = true;
        for (const auto& e : g.adj[u]) {
            if (visited[e.to]) continue;
            PathWidth cand = w[u].meet(e.connectivity);
            if (cand > w[e.to]) {
                w[e.to] = cand;
                pi[e.to] = u;
            }
        }
    }
    if (pi[d] == -1) return std::nullopt;
    double bottleneck = w[d].value;
    // pass 2: fewest hops among paths achieving the bottleneck
    Graph sub(g.n);
    for (int u = 0; u < g.n; ++u)
        for (const auto& e : g.adj[u])
            if (u < e.to && e.connectivity >= bottleneck)
                sub.add_edge(u, e.to, e.strength, e.connectivity);
    auto b = backward_dijkstra(sub, d);
    if (b[s] == kUnreachable) return std::nullopt;
    std::vector<int> path{s};
    int cur = s;
    while (cur != d) {
        int next = -1;
        for (const auto& e : sub.adj[cur])
            if (b[e.to] == b[cur] - 1 && (next == -1 || e.to < next)) next = e.to;
        path.push_back(next);
        cur = next;
    }
    return RankedPath{path, metrics_along(g, path), PathRank::J1};
}

void export_graph(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_graph: cannot open " + path);
    out << "# rope-graph n=" << g.n << "\n";
    char buf[160];
    for (int u = 0; u < g.n; ++u)
        for (const auto& e : g.adj[u])
            if (u < e.to) {
                std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,1\n", u, e.to, e.strength,
                              e.connectivity);
                out << buf;
            }
}

Graph import_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_graph: cannot open " + path);
    std::string line;
    Graph g(0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("n=");
            if (pos != std::string::npos) g = Graph(std::stoi(line.substr(pos + 2)));
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 5) throw std::runtime_error("import_graph: malformed edge row");
        g.add_edge(std::stoi(f[0]), std::stoi(f[1]), std::stod(f[2]), std::stod(f[3]));
    }
    return g;
}

}  // namespace rope
