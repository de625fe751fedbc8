#include "rope/verification.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "rope/metrics.hpp"

namespace rope {

const char* to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::ranked: return "ranked";
        case ActivationKind::mended: return "mended";
        case ActivationKind::direct: return "direct";
        default: return "gap";
    }
}

std::vector<LinkCheckReport> link_check(const RankedPath& path, const LinkProbe& probe,
                                        double t_activate, double delta_k,
                                        const VerifyParams& params) {
    if (!(delta_k > 0.0) || !(delta_k < params.tau / 2.0))
        throw std::invalid_argument("link_check: delta outside (0, tau/2)");
    std::vector<LinkCheckReport> reports;
    double t_probe = t_activate - delta_k;
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
        auto obs = probe(path.nodes[i], path.nodes[i + 1], t_probe);
        LinkCheckReport r;
        r.u = path.nodes[i];
        r.v = path.nodes[i + 1];
        r.rss = obs.rss;
        if (!obs.present) {
            r.endpoint_missing = true;
            r.connectivity = 0.0;
            r.qualified = false;
        } else {
            std::optional<double> est = obs.duration;
            if (est) *est = std::max(*est - delta_k, 0.0);
            r.connectivity = link_connectivity(est, params.tau);
            r.qualified = r.rss > params.gamma_th && r.connectivity > params.connectivity_min;
        }
        reports.push_back(r);
    }
    return reports;
}

namespace {

std::pair<int, int> link_key(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

void fill_flags(CheckedPath& cp) {
    std::size_t n = cp.path.nodes.size();
    std::size_t m = cp.reports.size();
    // prefix_ok[i]: links 0..i-1 all qualified; suffix_ok[i]: links i..m-1
    std::vector<bool> prefix_ok(n, true), suffix_ok(n, true);
    for (std::size_t i = 1; i < n; ++i)
        prefix_ok[i] = prefix_ok[i - 1] && cp.reports[i - 1].qualified;
    for (std::size_t i = m; i-- > 0;)
        suffix_ok[i] = suffix_ok[i + 1] && cp.reports[i].qualified;
    cp.sr = prefix_ok;
    cp.dr = suffix_ok;
}

}  // namespace

PathCheckResult path_check(const std::vector<RankedPath>& paths, const LinkProbe& probe,
                           double t_activate, const VerifyParams& params) {
    if (paths.size() > params.delta.size())
        throw std::invalid_argument("path_check: more paths than check slots");
    PathCheckResult result;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const auto& path = paths[k];
        bool doomed = false;
        for (std::size_t i = 0; i + 1 < path.nodes.size() && !doomed; ++i)
            if (result.fault_set.count(link_key(path.nodes[i], path.nodes[i + 1]))) doomed = true;
        if (doomed) {
            result.skipped.push_back(k);
            continue;
        }
        CheckedPath cp;
        cp.path = path;
        cp.slot = k;
        cp.reports = link_check(path, probe, t_activate, params.delta[k], params);
        cp.qualified = std::all_of(cp.reports.begin(), cp.reports.end(),
                                   [](const LinkCheckReport& r) { return r.qualified; });
        fill_flags(cp);
        for (const auto& r : cp.reports)
            if (!r.qualified) result.fault_set.insert(link_key(r.u, r.v));
        result.checked.push_back(std::move(cp));
        if (result.checked.back().qualified) {
            result.selected = path;
            break;
        }
    }
    return result;
}

std::optional<RankedPath> mend_paths(const std::vector<CheckedPath>& checked,
                                     const VerifyParams& params) {
    if (checked.size() < 2) return std::nullopt;

    struct Candidate {
        std::vector<int> nodes;
        PathMetrics metrics;
    };
    std::vector<Candidate> candidates;

    auto try_splice = [&](const CheckedPath& e, const CheckedPath& f) {
        for (std::size_t pe = 1; pe + 1 < e.path.nodes.size(); ++pe) {
            int u = e.path.nodes[pe];
            for (std::size_t pf = 1; pf + 1 < f.path.nodes.size(); ++pf) {
                if (f.path.nodes[pf] != u) continue;
                if (!e.sr[pe] || !f.dr[pf]) continue;
                std::vector<int> nodes(e.path.nodes.begin(), e.path.nodes.begin() + pe + 1);
                nodes.insert(nodes.end(), f.path.nodes.begin() + pf + 1, f.path.nodes.end());
                if (!is_simple(nodes)) continue;
                int hops = static_cast<int>(nodes.size()) - 1;
                if (hops >= params.hop_max) continue;
                std::vector<EdgeMetrics> edges;
                for (std::size_t i = 0; i < pe; ++i)
                    edges.push_back({normalized_strength(
                                         std::min(e.reports[i].rss, params.gamma_max),
                                         params.gamma_th, params.gamma_max),
                                     e.reports[i].connectivity, 1});
                for (std::size_t i = pf; i < f.reports.size(); ++i)
                    edges.push_back({normalized_strength(
                                         std::min(f.reports[i].rss, params.gamma_max),
                                         params.gamma_th, params.gamma_max),
                                     f.reports[i].connectivity, 1});
                candidates.push_back({std::move(nodes), path_metrics(edges)});
            }
        }
    };

    for (std::size_t a = 0; a < checked.size(); ++a)
        for (std::size_t b = 0; b < checked.size(); ++b)
            if (a != b && !checked[a].qualified && !checked[b].qualified)
                try_splice(checked[a], checked[b]);

    if (candidates.empty()) return std::nullopt;
    auto best = std::min_element(candidates.begin(), candidates.end(),
                                 [](const Candidate& a, const Candidate& b) {
                                     if (a.metrics.strength != b.metrics.strength)
                                         return a.metrics.strength > b.metrics.strength;
                                     if (a.metrics.hops != b.metrics.hops)
                                         return a.metrics.hops < b.metrics.hops;
                                     return a.nodes < b.nodes;
                                 });
    return RankedPath{best->nodes, best->metrics, PathRank::mended};
}

ActivationDecision select_final(const std::optional<RankedPath>& checked_selection,
                                const std::optional<RankedPath>& mended,
                                const std::optional<RankedPath>& direct_v2i) {
    if (checked_selection) return {ActivationKind::ranked, checked_selection};
    if (mended) return {ActivationKind::mended, mended};
    if (direct_v2i) return {ActivationKind::direct, direct_v2i};
    return {ActivationKind::gap, std::nullopt};
}

VerificationOutcome verify_and_select(const std::vector<RankedPath>& ranked,
                                      const std::optional<RankedPath>& direct_v2i,
                                      const LinkProbe& probe, double t_activate, int vue_id,
                                      const VerifyParams& params) {
    VerificationOutcome out;
    out.check = path_check(ranked, probe, t_activate, params);
    std::optional<RankedPath> mended;
    if (!out.check.selected) mended = mend_paths(out.check.checked, params);
    out.decision = select_final(out.check.selected, mended, direct_v2i);

    for (const auto& cp : out.check.checked)
        for (const auto& r : cp.reports)
            out.log.push_back({t_activate - params.delta[cp.slot], vue_id, cp.path.rank, r.u,
                               r.v, r.rss, r.connectivity, r.qualified});
    return out;
}

void append_verification_log(const std::vector<VerificationLogRow>& rows,
                             const std::string& path) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("append_verification_log: cannot open " + path);
    char buf[200];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%s,%d-%d,%.17g,%.17g,%d\n", r.t, r.vue,
                      to_string(r.rank), r.u, r.v, r.rss, r.conn, r.qualified ? 1 : 0);
        out << buf;
    }
}

}  // namespace rope
