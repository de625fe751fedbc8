// rope: command-line front end for the routing engine and simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "rope/harness.hpp"
#include "rope/rng.hpp"

namespace {

using rope::Method;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

// Config files are plain `key=value` lines; '#' starts a comment.
std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            auto e = s.find_last_not_of(" \t\r");
            s.erase(e == std::string::npos ? 0 : e + 1);
            return s;
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config(const std::map<std::string, std::string>& kv, rope::ExperimentConfig& cfg) {
    auto num = [&](const char* key, double& slot) {
        auto it = kv.find(key);
        if (it != kv.end()) slot = std::stod(it->second);
    };
    auto& cyc = cfg.cycle;
    num("tau", cyc.tau);
    num("gamma_th", cyc.routing.gamma_th);
    num("gamma_max", cyc.routing.gamma_max);
    num("c_th", cyc.routing.connectivity_min);
    num("d_i", cyc.d_i);
    num("d_v", cyc.d_v);
    num("vue_tx_power", cyc.vue_tx_power_dbm);
    num("delta1", cyc.delta[0]);
    num("delta2", cyc.delta[1]);
    num("delta3", cyc.delta[2]);
    num("duration", cfg.duration);
    if (auto it = kv.find("hop_max"); it != kv.end()) cyc.routing.hop_max = std::stoi(it->second);
    if (auto it = kv.find("history"); it != kv.end()) cyc.history = std::stoi(it->second);
    if (auto it = kv.find("top_k"); it != kv.end()) cyc.top_k = std::stoi(it->second);
    if (auto it = kv.find("verification"); it != kv.end())
        cyc.verification = it->second == "1" || it->second == "true" || it->second == "on";
    if (auto it = kv.find("reps"); it != kv.end()) cfg.reps = std::stoi(it->second);
    if (auto it = kv.find("seed"); it != kv.end()) cfg.seed = std::stoull(it->second);
    if (auto it = kv.find("densities"); it != kv.end()) {
        cfg.densities.clear();
        for (const auto& d : split_list(it->second)) cfg.densities.push_back(std::stod(d));
    }
    if (auto it = kv.find("gammas"); it != kv.end()) {
        cfg.gamma_grid.clear();
        for (const auto& g : split_list(it->second)) cfg.gamma_grid.push_back(std::stod(g));
    }
    if (auto it = kv.find("methods"); it != kv.end()) {
        cfg.methods.clear();
        for (const auto& m : split_list(it->second))
            cfg.methods.push_back(rope::method_from_string(m));
    }
}

void write_rows_csv(const std::vector<rope::CellResult>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,vue,method,kind,rank,p_s,p_c,p_h,qualified\n";
    char buf[240];
    for (const auto& c : cells)
        for (const auto& r : c.report.rows) {
            std::snprintf(buf, sizeof(buf), "%.17g,%d,%s,%s,%s,%.17g,%.17g,%d,%d\n", r.t, r.vue,
                          rope::to_string(c.method), rope::to_string(r.kind),
                          rope::to_string(r.rank), r.p_s, r.p_c, r.p_h, r.qualified ? 1 : 0);
            out << buf;
        }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"predictive multi-hop V2X routing engine and simulator"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    std::string config_path;
    app.add_option("--seed", seed, "base random seed");
    app.add_option("--config", config_path, "key=value config file");

    // gen-map
    auto* gen_map = app.add_subcommand("gen-map", "generate a grid-city map");
    int blocks = 4, bs_count = 4;
    double block_size = 300.0, road_width = 14.0;
    std::string map_out = "map.txt";
    gen_map->add_option("--blocks", blocks);
    gen_map->add_option("--block-size", block_size);
    gen_map->add_option("--road-width", road_width);
    gen_map->add_option("--bs", bs_count);
    gen_map->add_option("--out", map_out);

    // gen-traces
    auto* gen_traces = app.add_subcommand("gen-traces", "simulate vehicle traces on a map");
    std::string map_in = "map.txt", traces_out = "traces.csv";
    double density = 400.0, duration = 120.0, tau = 1.0;
    gen_traces->add_option("--map", map_in)->required();
    gen_traces->add_option("--density", density, "vehicles per hour per km");
    gen_traces->add_option("--duration", duration, "seconds");
    gen_traces->add_option("--tau", tau);
    gen_traces->add_option("--out", traces_out);

    // build-db
    auto* build_db = app.add_subcommand("build-db", "collect ground-truth link measurements");
    std::vector<std::string> trace_files;
    std::string db_out = "linkdb.csv";
    int v2v_samples = 2;
    build_db->add_option("--map", map_in)->required();
    build_db->add_option("--traces", trace_files)->required();
    build_db->add_option("--v2v-samples", v2v_samples);
    build_db->add_option("--out", db_out);

    // train
    auto* train = app.add_subcommand("train", "fit a strength model on a link database");
    std::string db_in, model_out = "model.txt", link_type = "V2I";
    int epochs = 40, batch = 64, hidden = 64;
    double lr = 0.02;
    train->add_option("--db", db_in)->required();
    train->add_option("--type", link_type, "V2I or V2V");
    train->add_option("--epochs", epochs);
    train->add_option("--batch", batch);
    train->add_option("--hidden", hidden);
    train->add_option("--lr", lr);
    train->add_option("--out", model_out);

    // run
    auto* run = app.add_subcommand("run", "run one scenario with one method");
    std::string v2i_model_path, v2v_model_path, traces_in, results_out = "rows.csv";
    std::string method_name = "ROPE", log_out;
    double run_gamma = -80.0;
    run->add_option("--map", map_in)->required();
    run->add_option("--traces", traces_in)->required();
    run->add_option("--v2i-model", v2i_model_path)->required();
    run->add_option("--v2v-model", v2v_model_path)->required();
    run->add_option("--method", method_name);
    run->add_option("--gamma", run_gamma, "RSS threshold, dBm");
    run->add_option("--out", results_out);
    run->add_option("--log", log_out, "verification log file");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "recompute aggregates from raw rows");
    std::string rows_in;
    eval_cmd->add_option("--rows", rows_in)->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "full factorial experiment");
    std::string sweep_out = "results.csv", cdf_out = "cdf.csv";
    sweep->add_option("--map", map_in)->required();
    sweep->add_option("--v2i-model", v2i_model_path)->required();
    sweep->add_option("--v2v-model", v2v_model_path)->required();
    sweep->add_option("--out", sweep_out);
    sweep->add_option("--cdf", cdf_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_map->parsed()) {
            auto map = rope::generate_map(blocks, blocks, block_size, road_width, bs_count, seed);
            rope::export_map(map, map_out);
            std::printf("map: %dx%d blocks, %zu roads, %zu buildings, %zu BS -> %s\n", blocks,
                        blocks, map.roads.size(), map.buildings.size(), map.bs_sites.size(),
                        map_out.c_str());
        } else if (gen_traces->parsed()) {
            auto map = rope::import_map(map_in);
            auto log = rope::generate_traces(map, density, duration, tau, seed);
            rope::export_traces(log, traces_out);
            std::printf("traces: %zu ticks, density level %s -> %s\n", log.ticks.size(),
                        rope::to_string(log.density_level), traces_out.c_str());
        } else if (build_db->parsed()) {
            auto map = rope::import_map(map_in);
            rope::CycleConfig cfg;
            std::vector<rope::LinkRecord> db;
            for (const auto& tf : trace_files) {
                auto log = rope::import_traces(tf);
                auto part = rope::build_link_db(map, log, seed, cfg, v2v_samples);
                db.insert(db.end(), part.begin(), part.end());
            }
            rope::export_link_db(db, db_out);
            std::printf("db: %zu records -> %s\n", db.size(), db_out.c_str());
        } else if (train->parsed()) {
            auto db = rope::import_link_db(db_in);
            rope::TrainHyper hyper;
            hyper.epochs = epochs;
            hyper.batch_size = batch;
            hyper.hidden = hidden;
            hyper.learning_rate = lr;
            hyper.seed = seed;
            rope::TrainReport report;
            auto type = link_type == "V2V" ? rope::LinkType::V2V : rope::LinkType::V2I;
            auto model = rope::train_capnet(db, type, hyper, &report);
            rope::save_model(model, model_out);
            std::printf("model %s: best epoch %d, val NLL %.4f, test NLL %.4f -> %s\n",
                        link_type.c_str(), report.best_epoch,
                        report.val_nll[static_cast<std::size_t>(report.best_epoch)],
                        report.test_nll, model_out.c_str());
        } else if (run->parsed()) {
            auto map = rope::import_map(map_in);
            auto trace = rope::import_traces(traces_in);
            rope::CycleModels models{rope::load_model(v2i_model_path),
                                     rope::load_model(v2v_model_path)};
            rope::ExperimentConfig cfg;
            cfg.seed = seed;
            if (!config_path.empty()) apply_config(load_config(config_path), cfg);
            cfg.cycle.routing.gamma_th = run_gamma;
            auto method = rope::method_from_string(method_name);
            rope::CellResult cell;
            cell.method = method;
            cell.density = 0.0;
            cell.gamma_th = run_gamma;
            cell.report = rope::run_scenario(trace, map, models, cfg.cycle, method, seed);
            write_rows_csv({cell}, results_out);
            if (!log_out.empty()) {
                std::ofstream(log_out).close();  // truncate
                std::size_t warm = static_cast<std::size_t>(cfg.cycle.history) + 2;
                for (std::size_t i = warm; i + 2 < trace.ticks.size(); ++i) {
                    auto tick = rope::run_cycle(i, trace, map, models, cfg.cycle, method, seed);
                    for (const auto& d : tick.decisions)
                        rope::append_verification_log(d.log, log_out);
                }
            }
            std::printf("run %s: %d active paths, P_Q %.2f%%, %d gaps -> %s\n",
                        method_name.c_str(), cell.report.active_paths,
                        cell.report.p_q_percent, cell.report.gaps, results_out.c_str());
        } else if (eval_cmd->parsed()) {
            std::ifstream in(rows_in);
            if (!in) throw std::runtime_error("cannot open " + rows_in);
            std::string line;
            std::getline(in, line);  // header
            std::vector<rope::TickRow> rows;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::vector<std::string> f;
                std::stringstream ss(line);
                std::string tok;
                while (std::getline(ss, tok, ',')) f.push_back(tok);
                if (f.size() != 9) throw std::runtime_error("malformed row: " + line);
                rope::TickRow r;
                r.t = std::stod(f[0]);
                r.vue = std::stoi(f[1]);
                r.kind = f[3] == "gap"      ? rope::ActivationKind::gap
                         : f[3] == "mended" ? rope::ActivationKind::mended
                         : f[3] == "direct" ? rope::ActivationKind::direct
                                            : rope::ActivationKind::ranked;
                r.p_s = std::stod(f[5]);
                r.p_c = std::stod(f[6]);
                r.p_h = std::stoi(f[7]);
                r.qualified = f[8] == "1";
                rows.push_back(r);
            }
            auto rep = rope::evaluate(rows, 0, 0, 0);
            std::printf("active %d, gaps %d, P_S %.2f dBm, P_C %.4f, P_H %.2f, P_Q %.2f%%\n",
                        rep.active_paths, rep.gaps, rep.p_s_mean, rep.p_c_mean, rep.p_h_mean,
                        rep.p_q_percent);
        } else if (sweep->parsed()) {
            auto map = rope::import_map(map_in);
            rope::CycleModels models{rope::load_model(v2i_model_path),
                                     rope::load_model(v2v_model_path)};
            rope::ExperimentConfig cfg;
            cfg.seed = seed;
            if (!config_path.empty()) apply_config(load_config(config_path), cfg);
            auto cells = rope::run_experiment(cfg, map, models);
            rope::write_results_csv(cells, sweep_out);
            rope::write_cdf_csv(cells, cdf_out);
            std::printf("sweep: %zu cells -> %s, %s\n", cells.size(), sweep_out.c_str(),
                        cdf_out.c_str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
