#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rope/channel.hpp"
#include "rope/predictor.hpp"
#include "rope/verification.hpp"
#include "rope/warning.hpp"

namespace rope {

enum class Method { rope, rope_minus, car, d_v2i };
const char* to_string(Method m);
Method method_from_string(const std::string& name);

struct CycleConfig {
    double tau = 1.0;
    int history = 3;  // past ticks consumed by the mobility predictor
    RoutingParams routing;
    std::array<double, 3> delta{0.100, 0.070, 0.040};
    double d_i = 400.0;
    double d_v = 300.0;
    double vue_tx_power_dbm = 23.0;
    bool verification = true;
    int top_k = 3;
    ChannelParams channel;

    void validate() const;
    VerifyParams verify_params() const;
    TopologyParams topology_params() const;
};

struct CycleModels {
    CapnetModel v2i;
    CapnetModel v2v;
};

struct VueDecision {
    WarningDecision warning;
    ActivationKind kind = ActivationKind::gap;
    std::optional<RankedPath> active;  // nodes indexed into the tick topology
    std::vector<VerificationLogRow> log;
};

struct TickResult {
    double t = 0.0;
    bool executed = false;  // false when the tick lacks history or lookahead
    VirtualTopology topology;
    std::vector<VueDecision> decisions;  // one per VUE with an active path, ascending id
    // warning bookkeeping against ground truth at t+tau
    int links_tested = 0;
    int links_deteriorated = 0;
    int links_warned_ok = 0;
};

// One Fig.-2 cycle at trace tick `tick_index`: predict, infer, warn, build
// the virtual topology, route per warned VUE, verify, pick the activation.
TickResult run_cycle(std::size_t tick_index, const TraceLog& trace, const WorldMap& map,
                     const CycleModels& models, const CycleConfig& config, Method method,
                     std::uint64_t scenario_seed);

// Ground-truth observation of one topology link; also the verification probe.
LinkObservation observe_link(const VirtualTopology& topo, int u, int v, double t,
                             const TraceLog& trace, const WorldMap& map,
                             std::uint64_t scenario_seed, const CycleConfig& config);

// Percent of truly deteriorated links the warning rule caught; nullopt when
// nothing deteriorated (ratio undefined).
std::optional<double> successful_warning_ratio(const std::vector<WarningDecision>& warnings,
                                               const std::vector<double>& true_rss,
                                               double gamma_th);

struct TickRow {
    double t = 0.0;
    int vue = -1;
    ActivationKind kind = ActivationKind::gap;
    PathRank rank = PathRank::direct;
    double p_s = 0.0;  // min true link RSS at activation, dBm
    double p_c = 0.0;
    int p_h = 0;
    bool qualified = false;  // all constraints, at t+tau and t+1.5tau
};

// Measure one activated decision against ground truth over the service
// interval. Gap decisions yield a row with kind=gap and no QoS fields.
TickRow measure_decision(const VueDecision& decision, const VirtualTopology& topo,
                         const TraceLog& trace, const WorldMap& map, std::uint64_t scenario_seed,
                         const CycleConfig& config, double t);

struct EvalReport {
    double p_s_mean = 0.0;  // dBm, active paths only
    double p_c_mean = 0.0;
    double p_h_mean = 0.0;
    double p_q_percent = 0.0;
    std::optional<double> warn_ratio_percent;
    int gaps = 0;
    int active_paths = 0;
    std::vector<TickRow> rows;
};

EvalReport evaluate(const std::vector<TickRow>& rows, int links_tested, int links_deteriorated,
                    int links_warned_ok);

// Full tick loop over one trace for one method/config cell.
EvalReport run_scenario(const TraceLog& trace, const WorldMap& map, const CycleModels& models,
                        const CycleConfig& config, Method method, std::uint64_t scenario_seed);

// Ground-truth link measurements collected along a trace, the training set
// for the strength models.
std::vector<LinkRecord> build_link_db(const WorldMap& map, const TraceLog& trace,
                                      std::uint64_t scenario_seed, const CycleConfig& config,
                                      int v2v_samples_per_vehicle = 2);

struct ExperimentConfig {
    std::vector<double> densities{200.0, 400.0, 600.0};
    std::vector<double> gamma_grid{-85.0, -80.0, -75.0, -70.0};
    std::vector<Method> methods{Method::rope, Method::rope_minus, Method::car, Method::d_v2i};
    int reps = 3;
    double duration = 120.0;  // seconds of trace per cell
    std::uint64_t seed = 1;
    CycleConfig cycle;
};

struct CellResult {
    Method method = Method::rope;
    double density = 0.0;
    double gamma_th = 0.0;
    int rep = 0;
    EvalReport report;
};

std::vector<CellResult> run_experiment(const ExperimentConfig& config, const WorldMap& map,
                                       const CycleModels& models);

void write_results_csv(const std::vector<CellResult>& cells, const std::string& path);
void write_cdf_csv(const std::vector<CellResult>& cells, const std::string& path);

}  // namespace rope
