#pragma once

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rope/routing.hpp"

namespace rope {

// What one link check message round-trip observes against the true world.
struct LinkObservation {
    double rss = -200.0;               // dBm at probe time
    std::optional<double> duration;    // s until out of range; nullopt = never
    bool present = true;               // both endpoints still in the world
};

// Ground-truth measurement callback: observe link (u,v) of the topology at
// absolute time t. Keeps the protocol logic independent of the simulator.
using LinkProbe = std::function<LinkObservation(int u, int v, double t)>;

struct VerifyParams {
    double gamma_th = -80.0;
    double gamma_max = -10.0;
    double connectivity_min = 0.999;  // C_th
    int hop_max = 6;                  // H_th
    double tau = 1.0;
    std::array<double, 3> delta{0.100, 0.070, 0.040};  // check schedule, s
};

struct LinkCheckReport {
    int u = -1, v = -1;
    double rss = -200.0;
    double connectivity = 0.0;  // estimated from t+tau, per the delta offset
    bool qualified = false;
    bool endpoint_missing = false;
};

// Measure every link of the path at t_activate - delta_k. The observed
// duration, shortened by delta_k, estimates how long the link survives past
// activation.
std::vector<LinkCheckReport> link_check(const RankedPath& path, const LinkProbe& probe,
                                        double t_activate, double delta_k,
                                        const VerifyParams& params);

struct CheckedPath {
    RankedPath path;
    std::size_t slot = 0;  // rank index; selects the delta offset used
    std::vector<LinkCheckReport> reports;
    // per node position: the subpath from s (resp. to d) is fully qualified
    std::vector<bool> sr, dr;
    bool qualified = false;
};

struct PathCheckResult {
    std::optional<RankedPath> selected;
    std::set<std::pair<int, int>> fault_set;
    std::vector<CheckedPath> checked;
    std::vector<std::size_t> skipped;  // indices skipped via the fault set
};

// Sequential verification of up to three ranked paths with fault-set
// shortcuts and early termination on the first fully qualified path.
PathCheckResult path_check(const std::vector<RankedPath>& paths, const LinkProbe& probe,
                           double t_activate, const VerifyParams& params);

// Splice a source-side prefix of one unqualified path onto a
// destination-side suffix of another at a shared node where the flags allow
// it. Strongest feasible candidate wins.
std::optional<RankedPath> mend_paths(const std::vector<CheckedPath>& checked,
                                     const VerifyParams& params);

enum class ActivationKind { ranked, mended, direct, gap };
const char* to_string(ActivationKind kind);

struct ActivationDecision {
    ActivationKind kind = ActivationKind::gap;
    std::optional<RankedPath> path;
};

// Preference order: qualified checked path, then mended, then direct V2I.
ActivationDecision select_final(const std::optional<RankedPath>& checked_selection,
                                const std::optional<RankedPath>& mended,
                                const std::optional<RankedPath>& direct_v2i);

struct VerificationLogRow {
    double t = 0.0;
    int vue = -1;
    PathRank rank = PathRank::J1;
    int u = -1, v = -1;
    double rss = -200.0;
    double conn = 0.0;
    bool qualified = false;
};

struct VerificationOutcome {
    ActivationDecision decision;
    PathCheckResult check;
    std::vector<VerificationLogRow> log;
};

// Full pre-switchover round for one warned VUE: check, mend if needed,
// choose what to activate at t_activate.
VerificationOutcome verify_and_select(const std::vector<RankedPath>& ranked,
                                      const std::optional<RankedPath>& direct_v2i,
                                      const LinkProbe& probe, double t_activate, int vue_id,
                                      const VerifyParams& params);

void append_verification_log(const std::vector<VerificationLogRow>& rows, const std::string& path);

}  // namespace rope
