#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rope/harness.hpp"

namespace py = pybind11;
using namespace rope;

PYBIND11_MODULE(_rope, m) {
    m.doc() = "predictive multi-hop V2X routing engine";

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<>())
        .def(py::init([](double x, double y) { return Vec2{x, y}; }))
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("norm", &Vec2::norm);

    py::enum_<DensityLevel>(m, "DensityLevel")
        .value("low", DensityLevel::low)
        .value("medium", DensityLevel::medium)
        .value("high", DensityLevel::high);

    py::enum_<Method>(m, "Method")
        .value("rope", Method::rope)
        .value("rope_minus", Method::rope_minus)
        .value("car", Method::car)
        .value("d_v2i", Method::d_v2i);

    py::class_<WorldMap>(m, "WorldMap")
        .def_readonly("extent_x", &WorldMap::extent_x)
        .def_readonly("extent_y", &WorldMap::extent_y)
        .def("road_count", [](const WorldMap& w) { return w.roads.size(); })
        .def("building_count", [](const WorldMap& w) { return w.buildings.size(); })
        .def("bs_count", [](const WorldMap& w) { return w.bs_sites.size(); });

    py::class_<TraceLog>(m, "TraceLog")
        .def_readonly("tau", &TraceLog::tau)
        .def_readonly("density_level", &TraceLog::density_level)
        .def("tick_count", [](const TraceLog& t) { return t.ticks.size(); });

    m.def("generate_map", &generate_map, py::arg("blocks_x"), py::arg("blocks_y"),
          py::arg("block_size"), py::arg("road_width"), py::arg("bs_count"), py::arg("seed"));
    m.def("export_map", &export_map);
    m.def("import_map", &import_map);
    py::class_<TraceGenParams>(m, "TraceGenParams").def(py::init<>());
    m.def("generate_traces", &generate_traces, py::arg("map"), py::arg("density"),
          py::arg("duration"), py::arg("tau"), py::arg("seed"),
          py::arg("params") = TraceGenParams{});
    m.def("export_traces", &export_traces);
    m.def("import_traces", &import_traces);
    m.def("total_road_km", &total_road_km);

    py::class_<LinkRecord>(m, "LinkRecord")
        .def(py::init<>())
        .def_readwrite("rss", &LinkRecord::rss);
    m.def("export_link_db", &export_link_db);
    m.def("import_link_db", &import_link_db);

    py::class_<StrengthDistribution>(m, "StrengthDistribution")
        .def(py::init<>())
        .def_readwrite("mu", &StrengthDistribution::mu)
        .def_readwrite("var", &StrengthDistribution::var);

    py::class_<FeatureVector>(m, "FeatureVector")
        .def(py::init<>())
        .def_readwrite("x", &FeatureVector::x)
        .def_readwrite("c", &FeatureVector::c);

    py::class_<TrainHyper>(m, "TrainHyper")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainHyper::learning_rate)
        .def_readwrite("epochs", &TrainHyper::epochs)
        .def_readwrite("batch_size", &TrainHyper::batch_size)
        .def_readwrite("seed", &TrainHyper::seed)
        .def_readwrite("hidden", &TrainHyper::hidden);

    py::class_<CapnetModel>(m, "CapnetModel")
        .def("param_count", &CapnetModel::param_count);
    py::enum_<LinkType>(m, "LinkType").value("V2I", LinkType::V2I).value("V2V", LinkType::V2V);
    m.def("train_capnet",
          [](const std::vector<LinkRecord>& db, LinkType t, const TrainHyper& h) {
              return train_capnet(db, t, h);
          });
    m.def("infer_strength", &infer_strength);
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);

    m.def("normalized_strength", &normalized_strength);
    m.def("link_connectivity", &link_connectivity);
    py::class_<RelativeKinematics>(m, "RelativeKinematics")
        .def(py::init([](double dd, double dv, double a, double d) {
            return RelativeKinematics{dd, dv, a, d};
        }))
        .def_readwrite("displacement", &RelativeKinematics::displacement)
        .def_readwrite("speed", &RelativeKinematics::speed)
        .def_readwrite("angle", &RelativeKinematics::angle)
        .def_readwrite("range", &RelativeKinematics::range);
    m.def("link_duration", &link_duration);

    py::class_<PathMetrics>(m, "PathMetrics")
        .def_readonly("strength", &PathMetrics::strength)
        .def_readonly("connectivity", &PathMetrics::connectivity)
        .def_readonly("hops", &PathMetrics::hops);

    py::enum_<PathRank>(m, "PathRank")
        .value("J1", PathRank::J1)
        .value("J2", PathRank::J2)
        .value("J3", PathRank::J3)
        .value("mended", PathRank::mended)
        .value("direct", PathRank::direct);

    py::class_<RankedPath>(m, "RankedPath")
        .def_readonly("nodes", &RankedPath::nodes)
        .def_readonly("metrics", &RankedPath::metrics)
        .def_readonly("rank", &RankedPath::rank);

    py::class_<Graph>(m, "Graph")
        .def(py::init<int>())
        .def_readonly("n", &Graph::n)
        .def("add_edge", &Graph::add_edge)
        .def("edge_count", &Graph::edge_count);

    py::class_<RoutingParams>(m, "RoutingParams")
        .def(py::init<>())
        .def_readwrite("connectivity_min", &RoutingParams::connectivity_min)
        .def_readwrite("hop_max", &RoutingParams::hop_max)
        .def_readwrite("gamma_th", &RoutingParams::gamma_th)
        .def_readwrite("gamma_max", &RoutingParams::gamma_max);

    m.def("tora_top3", [](const Graph& g, int s, int d, const RoutingParams& p) {
        return tora_top3(g, s, d, p);
    });
    m.def("wfpf", &wfpf);
    m.def("baseline_car", &baseline_car);

    py::class_<CycleConfig>(m, "CycleConfig")
        .def(py::init<>())
        .def_readwrite("tau", &CycleConfig::tau)
        .def_readwrite("history", &CycleConfig::history)
        .def_readwrite("routing", &CycleConfig::routing)
        .def_readwrite("d_i", &CycleConfig::d_i)
        .def_readwrite("d_v", &CycleConfig::d_v)
        .def_readwrite("verification", &CycleConfig::verification)
        .def_readwrite("top_k", &CycleConfig::top_k);

    py::class_<CycleModels>(m, "CycleModels")
        .def(py::init([](const CapnetModel& v2i, const CapnetModel& v2v) {
            return CycleModels{v2i, v2v};
        }))
        .def_readwrite("v2i", &CycleModels::v2i)
        .def_readwrite("v2v", &CycleModels::v2v);

    py::class_<TickRow>(m, "TickRow")
        .def_readonly("t", &TickRow::t)
        .def_readonly("vue", &TickRow::vue)
        .def_readonly("p_s", &TickRow::p_s)
        .def_readonly("p_c", &TickRow::p_c)
        .def_readonly("p_h", &TickRow::p_h)
        .def_readonly("qualified", &TickRow::qualified);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("p_s_mean", &EvalReport::p_s_mean)
        .def_readonly("p_c_mean", &EvalReport::p_c_mean)
        .def_readonly("p_h_mean", &EvalReport::p_h_mean)
        .def_readonly("p_q_percent", &EvalReport::p_q_percent)
        .def_readonly("gaps", &EvalReport::gaps)
        .def_readonly("active_paths", &EvalReport::active_paths)
        .def_readonly("rows", &EvalReport::rows);

    m.def("build_link_db", &build_link_db, py::arg("map"), py::arg("trace"), py::arg("seed"),
          py::arg("config"), py::arg("v2v_samples_per_vehicle") = 2);
    m.def("run_scenario", &run_scenario);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("densities", &ExperimentConfig::densities)
        .def_readwrite("gamma_grid", &ExperimentConfig::gamma_grid)
        .def_readwrite("methods", &ExperimentConfig::methods)
        .def_readwrite("reps", &ExperimentConfig::reps)
        .def_readwrite("duration", &ExperimentConfig::duration)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("cycle", &ExperimentConfig::cycle);

    py::class_<CellResult>(m, "CellResult")
        .def_readonly("method", &CellResult::method)
        .def_readonly("density", &CellResult::density)
        .def_readonly("gamma_th", &CellResult::gamma_th)
        .def_readonly("rep", &CellResult::rep)
        .def_readonly("report", &CellResult::report);

    m.def("run_experiment", &run_experiment);
    m.def("write_results_csv", &write_results_csv);
    m.def("write_cdf_csv", &write_cdf_csv);
}
