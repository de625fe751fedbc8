#include "rope/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "rope/rng.hpp"

namespace rope {

const char* to_string(Method m) {
    switch (m) {
        case Method::rope: return "ROPE";
        case Method::rope_minus: return "ROPE-";
        case Method::car: return "CAR";
        default: return "D-V2I";
    }
}

Method method_from_string(const std::string& name) {
    if (name == "ROPE") return Method::rope;
    if (name == "ROPE-") return Method::rope_minus;
    if (name == "CAR") return Method::car;
    if (name == "D-V2I") return Method::d_v2i;
    throw std::invalid_argument("unknown method: " + name);
}

void CycleConfig::validate() const {
    if (history < 1) throw std::invalid_argument("CycleConfig: history must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("CycleConfig: tau must be > 0");
    for (double d : delta)
        if (!(d > 0.0) || !(d < tau / 2.0))
            throw std::invalid_argument("CycleConfig: delta outside (0, tau/2)");
    if (!(delta[0] > delta[1] && delta[1] > delta[2]))
        throw std::invalid_argument("CycleConfig: delta schedule must decrease");
    if (top_k < 1 || top_k > 3) throw std::invalid_argument("CycleConfig: top_k must be 1..3");
}

VerifyParams CycleConfig::verify_params() const {
    VerifyParams p;
    p.gamma_th = routing.gamma_th;
    p.gamma_max = routing.gamma_max;
    p.connectivity_min = routing.connectivity_min;
    p.hop_max = routing.hop_max;
    p.tau = tau;
    p.delta = delta;
    return p;
}

TopologyParams CycleConfig::topology_params() const {
    TopologyParams p;
    p.gamma_th = routing.gamma_th;
    p.gamma_max = routing.gamma_max;
    p.d_i = d_i;
    p.d_v = d_v;
    p.tau = tau;
    return p;
}

namespace {

// Base stations get negative ids in the shadowing field so they never
// collide with vehicle ids.
int bs_shadow_id(int bs_index) { return -(bs_index + 1); }

double v2i_rss(const VehicleState& v, int bs_index, const WorldMap& map,
               const std::vector<VehicleState>& vehicles, std::uint64_t seed,
               const ChannelParams& ch) {
    const auto& bs = map.bs_sites[static_cast<std::size_t>(bs_index)];
    return true_link_rss(v.position, v.antenna_height, v.id, bs.position, bs.antenna_height,
                         bs_shadow_id(bs_index), bs.tx_power_dbm, map, vehicles, seed, ch);
}

double v2v_rss(const VehicleState& a, const VehicleState& b, const WorldMap& map,
               const std::vector<VehicleState>& vehicles, std::uint64_t seed, double tx_power,
               const ChannelParams& ch) {
    return true_link_rss(a.position, a.antenna_height, a.id, b.position, b.antenna_height, b.id,
                         tx_power, map, vehicles, seed, ch);
}

const VehicleState* find_state(const std::vector<VehicleState>& states, int id) {
    for (const auto& s : states)
        if (s.id == id) return &s;
    return nullptr;
}

std::optional<double> bounded_duration(const RelativeKinematics& k) {
    if (k.displacement >= k.range) return 0.0;
    return link_duration(k);
}

std::optional<int> associate_by_rss(const VehicleState& v, const WorldMap& map,
                                    const std::vector<VehicleState>& vehicles,
                                    std::uint64_t seed, double d_i, const ChannelParams& ch) {
    std::vector<double> rss;
    rss.reserve(map.bs_sites.size());
    for (std::size_t b = 0; b < map.bs_sites.size(); ++b)
        rss.push_back(v2i_rss(v, static_cast<int>(b), map, vehicles, seed, ch));
    return associate_bs(v, map, rss, d_i);
}

}  // namespace

LinkObservation observe_link(const VirtualTopology& topo, int u, int v, double t,
                             const TraceLog& trace, const WorldMap& map,
                             std::uint64_t scenario_seed, const CycleConfig& config) {
    if (u == topo.bs_node) std::swap(u, v);
    auto states = states_at(trace, t);
    const auto* a = find_state(states, topo.vue_ids.at(static_cast<std::size_t>(u)));
    if (!a) return {-200.0, 0.0, false};

    LinkObservation obs;
    if (v == topo.bs_node) {
        std::optional<int> bs = topo.bs_of[static_cast<std::size_t>(u)];
        if (!bs)
            bs = associate_by_rss(*a, map, states, scenario_seed, config.d_i, config.channel);
        if (!bs) {
            // nowhere in coverage; report against the closest site
            double best = 0.0;
            for (std::size_t i = 0; i < map.bs_sites.size(); ++i) {
                double d = distance(a->position, map.bs_sites[i].position);
                if (!bs || d < best) { bs = static_cast<int>(i); best = d; }
            }
        }
        if (!bs) return {-200.0, 0.0, false};  // map without base stations
        const auto& site = map.bs_sites[static_cast<std::size_t>(*bs)];
        obs.rss = v2i_rss(*a, *bs, map, states, scenario_seed, config.channel);
        auto k = relative_kinematics(a->position, a->velocity, site.position, {0.0, 0.0},
                                     config.d_i);
        obs.duration = bounded_duration(k);
    } else {
        const auto* b = find_state(states, topo.vue_ids.at(static_cast<std::size_t>(v)));
        if (!b) return {-200.0, 0.0, false};
        obs.rss = v2v_rss(*a, *b, map, states, scenario_seed, config.vue_tx_power_dbm,
                          config.channel);
        auto k = relative_kinematics(a->position, a->velocity, b->position, b->velocity,
                                     config.d_v);
        obs.duration = bounded_duration(k);
    }
    return obs;
}

TickResult run_cycle(std::size_t tick_index, const TraceLog& trace, const WorldMap& map,
                     const CycleModels& models, const CycleConfig& config, Method method,
                     std::uint64_t scenario_seed) {
    config.validate();
    TickResult res;
    if (tick_index >= trace.ticks.size()) throw std::invalid_argument("run_cycle: bad tick index");
    res.t = trace.ticks[tick_index].time;
    std::size_t T = static_cast<std::size_t>(config.history);
    if (tick_index < T || tick_index + 1 >= trace.ticks.size()) return res;
    res.executed = true;

    double tau = config.tau;
    double t = res.t;
    const auto& now = trace.ticks[tick_index].states;
    const auto& next = trace.ticks[tick_index + 1].states;

    std::vector<PredictedVue> vues;
    for (const auto& v : now) {
        std::vector<VehicleState> hist;
        bool complete = true;
        for (std::size_t k = tick_index - T; k <= tick_index && complete; ++k) {
            const auto* s = find_state(trace.ticks[k].states, v.id);
            if (!s) complete = false;
            else hist.push_back(*s);
        }
        if (!complete) continue;
        auto pm = predict_mobility(hist, tau, tau, map);
        PredictedVue pv;
        pv.id = v.id;
        pv.position = pm.position;
        pv.velocity = pm.velocity;
        pv.antenna_height = v.antenna_height;
        pv.bs_index = associate_by_rss(v, map, now, scenario_seed, config.d_i, config.channel);
        if (pv.bs_index) {
            FeatureVector f;
            f.x = {pm.position.x, pm.position.y, v.antenna_height, pm.velocity.norm()};
            f.c = density_one_hot(trace.density_level);
            pv.v2i = infer_strength(models.v2i, f);
        }
        vues.push_back(pv);
    }

    std::vector<WarningDecision> warnings(vues.size());
    for (std::size_t i = 0; i < vues.size(); ++i) {
        const auto& pv = vues[i];
        std::optional<Vec2> bs_pos;
        if (pv.bs_index)
            bs_pos = map.bs_sites[static_cast<std::size_t>(*pv.bs_index)].position;
        auto dist = pv.v2i.value_or(StrengthDistribution{-200.0, 1e-12});
        warnings[i] = check_warning(pv.id, dist, pv.position, bs_pos, config.routing.gamma_th,
                                    config.d_i);
    }

    for (std::size_t i = 0; i < vues.size(); ++i) {
        const auto& pv = vues[i];
        if (!pv.bs_index) continue;
        const auto* s = find_state(next, pv.id);
        if (!s) continue;
        ++res.links_tested;
        double truth = v2i_rss(*s, *pv.bs_index, map, next, scenario_seed, config.channel);
        if (truth <= config.routing.gamma_th) {
            ++res.links_deteriorated;
            if (warnings[i].triggered) ++res.links_warned_ok;
        }
    }

    V2vInference v2v_model = [&](const PredictedVue& a, const PredictedVue& b) {
        FeatureVector f;
        f.x = v2v_feature_values(a.position, a.antenna_height, a.velocity.norm(), b.position,
                                 b.antenna_height, b.velocity.norm());
        f.c = density_one_hot(trace.density_level);
        return infer_strength(models.v2v, f);
    };
    res.topology = build_virtual_topology(vues, map.bs_sites, v2v_model,
                                          config.topology_params(), t + tau);
    const auto& topo = res.topology;

    bool verify = method == Method::rope && config.verification;
    int top_k = method == Method::rope ? config.top_k : 1;

    LinkProbe probe = [&](int u, int v, double tt) {
        return observe_link(topo, u, v, tt, trace, map, scenario_seed, config);
    };

    for (std::size_t i = 0; i < vues.size(); ++i) {
        int s = static_cast<int>(i);
        int d = topo.bs_node;
        if (!warnings[i].triggered) {
            // healthy VUE: its serving V2I link simply stays active
            VueDecision keep;
            keep.warning = warnings[i];
            keep.kind = ActivationKind::direct;
            keep.active = RankedPath{{s, d}, PathMetrics{0.0, 0.0, 1}, PathRank::direct};
            res.decisions.push_back(std::move(keep));
            continue;
        }
        VueDecision dec;
        dec.warning = warnings[i];

        std::optional<RankedPath> direct;
        if (const auto* st = find_state(next, vues[i].id)) {
            for (const auto& bs : map.bs_sites)
                if (distance(st->position, bs.position) <= config.d_i) {
                    direct = RankedPath{{s, d}, PathMetrics{0.0, 0.0, 1}, PathRank::direct};
                    break;
                }
        }

        std::optional<RankedPath> routed;
        std::vector<RankedPath> ranked;
        if (method != Method::d_v2i) {
            if (method == Method::car) {
                if (auto p = baseline_car(topo.graph, s, d)) ranked.push_back(*p);
            } else {
                ranked = tora_top3(topo.graph, s, d, config.routing);
                if (static_cast<int>(ranked.size()) > top_k)
                    ranked.resize(static_cast<std::size_t>(top_k));
            }
        }

        if (verify) {
            auto out = verify_and_select(ranked, direct, probe, t + tau, vues[i].id,
                                         config.verify_params());
            dec.kind = out.decision.kind;
            dec.active = out.decision.path;
            dec.log = out.log;
        } else {
            if (!ranked.empty()) routed = ranked.front();
            auto decision = select_final(routed, std::nullopt, direct);
            dec.kind = decision.kind;
            dec.active = decision.path;
        }
        res.decisions.push_back(std::move(dec));
    }
    return res;
}

std::optional<double> successful_warning_ratio(const std::vector<WarningDecision>& warnings,
                                               const std::vector<double>& true_rss,
                                               double gamma_th) {
    if (warnings.size() != true_rss.size())
        throw std::invalid_argument("successful_warning_ratio: misaligned inputs");
    int deteriorated = 0, caught = 0;
    for (std::size_t i = 0; i < warnings.size(); ++i) {
        if (true_rss[i] > gamma_th) continue;
        ++deteriorated;
        if (warnings[i].triggered) ++caught;
    }
    if (deteriorated == 0) return std::nullopt;
    return 100.0 * caught / deteriorated;
}

TickRow measure_decision(const VueDecision& decision, const VirtualTopology& topo,
                         const TraceLog& trace, const WorldMap& map, std::uint64_t scenario_seed,
                         const CycleConfig& config, double t) {
    TickRow row;
    row.t = t;
    row.vue = decision.warning.vue_id;
    row.kind = decision.kind;
    if (decision.kind == ActivationKind::gap || !decision.active) {
        row.p_s = std::nan("");
        row.p_c = std::nan("");
        return row;
    }
    const auto& nodes = decision.active->nodes;
    row.rank = decision.active->rank;
    row.p_h = static_cast<int>(nodes.size()) - 1;

    bool ok = row.p_h < config.routing.hop_max;
    double samples[2] = {t + config.tau, t + 1.5 * config.tau};
    for (int si = 0; si < 2; ++si) {
        double min_rss = 0.0, min_conn = 1.0;
        bool first = true;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            auto obs = observe_link(topo, nodes[i], nodes[i + 1], samples[si], trace, map,
                                    scenario_seed, config);
            double conn = obs.present ? link_connectivity(obs.duration, config.tau) : 0.0;
            if (!obs.present) ok = false;
            else {
                if (!(obs.rss > config.routing.gamma_th)) ok = false;
                if (!(conn > config.routing.connectivity_min)) ok = false;
            }
            if (first || obs.rss < min_rss) min_rss = obs.rss;
            min_conn = std::min(min_conn, conn);
            first = false;
        }
        if (si == 0) {
            row.p_s = min_rss;
            row.p_c = min_conn;
        }
    }
    row.qualified = ok;
    return row;
}

EvalReport evaluate(const std::vector<TickRow>& rows, int links_tested, int links_deteriorated,
                    int links_warned_ok) {
    EvalReport rep;
    rep.rows = rows;
    double s = 0, c = 0, h = 0;
    int q = 0;
    for (const auto& r : rows) {
        if (r.kind == ActivationKind::gap) {
            ++rep.gaps;
            continue;
        }
        ++rep.active_paths;
        s += r.p_s;
        c += r.p_c;
        h += r.p_h;
        if (r.qualified) ++q;
    }
    if (rep.active_paths > 0) {
        rep.p_s_mean = s / rep.active_paths;
        rep.p_c_mean = c / rep.active_paths;
        rep.p_h_mean = h / rep.active_paths;
        rep.p_q_percent = 100.0 * q / rep.active_paths;
    }
    (void)links_tested;
    if (links_deteriorated > 0)
        rep.warn_ratio_percent = 100.0 * links_warned_ok / links_deteriorated;
    return rep;
}

EvalReport run_scenario(const TraceLog& trace, const WorldMap& map, const CycleModels& models,
                        const CycleConfig& config, Method method, std::uint64_t scenario_seed) {
    std::vector<TickRow> rows;
    int tested = 0, deteriorated = 0, warned = 0;
    std::size_t n = trace.ticks.size();
    std::size_t warmup = static_cast<std::size_t>(config.history) + 2;
    for (std::size_t idx = warmup; idx + 2 < n; ++idx) {
        auto tick = run_cycle(idx, trace, map, models, config, method, scenario_seed);
        if (!tick.executed) continue;
        tested += tick.links_tested;
        deteriorated += tick.links_deteriorated;
        warned += tick.links_warned_ok;
        for (const auto& dec : tick.decisions)
            rows.push_back(measure_decision(dec, tick.topology, trace, map, scenario_seed,
                                            config, tick.t));
    }
    return evaluate(rows, tested, deteriorated, warned);
}

std::vector<LinkRecord> build_link_db(const WorldMap& map, const TraceLog& trace,
                                      std::uint64_t scenario_seed, const CycleConfig& config,
                                      int v2v_samples_per_vehicle) {
    std::vector<LinkRecord> db;
    for (std::size_t ti = 0; ti < trace.ticks.size(); ++ti) {
        const auto& states = trace.ticks[ti].states;
        Rng rng(hash_combine(scenario_seed, hash_combine(0xdb0ULL, ti)));
        for (std::size_t i = 0; i < states.size(); ++i) {
            const auto& v = states[i];
            auto bs = associate_by_rss(v, map, states, scenario_seed, config.d_i, config.channel);
            if (bs) {
                const auto& site = map.bs_sites[static_cast<std::size_t>(*bs)];
                LinkRecord r;
                r.type = LinkType::V2I;
                r.tx_id = v.id;
                r.rx_id = *bs;
                r.x_t = v.position.x;
                r.y_t = v.position.y;
                r.h_t = v.antenna_height;
                r.v_t = v.speed();
                r.x_r = site.position.x;
                r.y_r = site.position.y;
                r.h_r = site.antenna_height;
                r.v_r = 0.0;
                r.rss = v2i_rss(v, *bs, map, states, scenario_seed, config.channel);
                r.density = trace.density_level;
                db.push_back(r);
            }
            std::vector<std::size_t> partners;
            for (std::size_t j = i + 1; j < states.size(); ++j)
                if (distance(v.position, states[j].position) < config.d_v) partners.push_back(j);
            int want = std::min<int>(v2v_samples_per_vehicle, static_cast<int>(partners.size()));
            for (int k = 0; k < want; ++k) {
                std::size_t pick = k + rng.uniform_int(partners.size() - k);
                std::swap(partners[k], partners[pick]);
                const auto& o = states[partners[static_cast<std::size_t>(k)]];
                LinkRecord r;
                r.type = LinkType::V2V;
                r.tx_id = v.id;
                r.rx_id = o.id;
                r.x_t = v.position.x;
                r.y_t = v.position.y;
                r.h_t = v.antenna_height;
                r.v_t = v.speed();
                r.x_r = o.position.x;
                r.y_r = o.position.y;
                r.h_r = o.antenna_height;
                r.v_r = o.speed();
                r.rss = v2v_rss(v, o, map, states, scenario_seed, config.vue_tx_power_dbm,
                                config.channel);
                r.density = trace.density_level;
                db.push_back(r);
            }
        }
    }
    return db;
}

std::vector<CellResult> run_experiment(const ExperimentConfig& config, const WorldMap& map,
                                       const CycleModels& models) {
    std::vector<CellResult> cells;
    for (std::size_t di = 0; di < config.densities.size(); ++di) {
        double density = config.densities[di];
        for (int rep = 0; rep < config.reps; ++rep) {
            std::uint64_t tseed = hash_combine(config.seed,
                                               hash_combine(di + 1, static_cast<std::uint64_t>(rep) + 1));
            TraceLog trace = generate_traces(map, density, config.duration, config.cycle.tau,
                                             tseed);
            for (double gamma : config.gamma_grid) {
                CycleConfig cc = config.cycle;
                cc.routing.gamma_th = gamma;
                for (Method m : config.methods) {
                    CellResult cell;
                    cell.method = m;
                    cell.density = density;
                    cell.gamma_th = gamma;
                    cell.rep = rep;
                    cell.report = run_scenario(trace, map, models, cc, m, tseed);
                    cells.push_back(std::move(cell));
                }
            }
        }
    }
    return cells;
}

void write_results_csv(const std::vector<CellResult>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_results_csv: cannot open " + path);
    out << "method,density,gamma_th,rep,P_S,P_C,P_H,P_Q,warn_ratio,gaps\n";
    char buf[360];
    for (const auto& c : cells) {
        const auto& r = c.report;
        std::string ps = "na", pc = "na", ph = "na", pq = "na";
        if (r.active_paths > 0) {
            std::snprintf(buf, sizeof(buf), "%.17g", r.p_s_mean); ps = buf;
            std::snprintf(buf, sizeof(buf), "%.17g", r.p_c_mean); pc = buf;
            std::snprintf(buf, sizeof(buf), "%.17g", r.p_h_mean); ph = buf;
            std::snprintf(buf, sizeof(buf), "%.17g", r.p_q_percent); pq = buf;
        }
        std::string wr = "na";
        if (r.warn_ratio_percent) {
            std::snprintf(buf, sizeof(buf), "%.17g", *r.warn_ratio_percent);
            wr = buf;
        }
        std::snprintf(buf, sizeof(buf), "%s,%g,%g,%d,%s,%s,%s,%s,%s,%d\n", to_string(c.method),
                      c.density, c.gamma_th, c.rep, ps.c_str(), pc.c_str(), ph.c_str(),
                      pq.c_str(), wr.c_str(), r.gaps);
        out << buf;
    }
}

void write_cdf_csv(const std::vector<CellResult>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_cdf_csv: cannot open " + path);
    out << "method,p_s,cdf\n";
    std::vector<Method> order;
    std::map<Method, std::vector<double>> values;
    for (const auto& c : cells) {
        if (!values.count(c.method)) order.push_back(c.method);
        auto& vec = values[c.method];
        for (const auto& row : c.report.rows)
            if (row.kind != ActivationKind::gap) vec.push_back(row.p_s);
    }
    char buf[120];
    for (Method m : order) {
        auto& vec = values[m];
        std::sort(vec.begin(), vec.end());
        for (std::size_t i = 0; i < vec.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", to_string(m), vec[i],
                          (i + 1.0) / vec.size());
            out << buf;
        }
    }
}

}  // namespace rope
