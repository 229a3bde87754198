#include "aqmlab/aqm.hpp"
#include "aqmlab/cartpole.hpp"
#include "aqmlab/cli.hpp"
#include "aqmlab/kred.hpp"
#include "aqmlab/network.hpp"
#include "aqmlab/scenario.hpp"
#include "aqmlab/som.hpp"
#include "aqmlab/training.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace aqmlab;

namespace {

nlohmann::json parse_overrides(const std::string& text) {
  if (text.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("overrides: ") + e.what());
  }
}

py::dict metrics_dict(const RunMetrics& m, bool with_series) {
  py::dict d;
  d["scenario"] = m.scenario;
  d["aqm"] = m.aqm;
  d["capacity_bps"] = m.capacity_bps;
  d["mean_delay_ms"] = m.mean_delay_ms;
  d["std_delay_ms"] = m.std_delay_ms;
  d["mean_tput_bps"] = m.mean_tput_bps;
  d["std_tput_bps"] = m.std_tput_bps;
  d["drop_rate"] = m.drop_rate;
  d["arrivals"] = m.arrivals;
  d["early_drops"] = m.early_drops;
  d["forced_drops"] = m.forced_drops;
  d["departures"] = m.departures;
  d["mean_queue"] = m.mean_queue;
  d["std_queue"] = m.std_queue;
  if (with_series) {
    std::vector<double> t, q, avg, p;
    for (const auto& r : m.series) {
      t.push_back(r.time);
      q.push_back(static_cast<double>(r.queue));
      avg.push_back(r.avg_queue);
      p.push_back(r.max_p);
    }
    d["time"] = t;
    d["queue"] = q;
    d["avg_queue"] = avg;
    d["max_p"] = p;
  }
  return d;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"aqmlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  py::print(out.str(), py::arg("end") = "");
  if (!err.str().empty()) py::print(err.str(), py::arg("end") = "", py::arg("file") = py::module_::import("sys").attr("stderr"));
  return code;
}

} // namespace

PYBIND11_MODULE(_aqmlab, m) {
  m.doc() = "Discrete-event AQM simulator with a Kohonen-map RED controller";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FrozenMapError>(m, "FrozenMapError", PyExc_RuntimeError);

  py::class_<RedParams>(m, "RedParams")
      .def(py::init<>())
      .def_readwrite("min_th", &RedParams::min_th)
      .def_readwrite("max_th", &RedParams::max_th)
      .def_readwrite("q_size", &RedParams::q_size)
      .def_readwrite("q_weight", &RedParams::q_weight)
      .def_readwrite("max_p", &RedParams::max_p)
      .def_readwrite("gentle", &RedParams::gentle);

  m.def("ewma_update", &ewma_update, py::arg("avg"), py::arg("q"), py::arg("w_q"));
  m.def("red_mark_prob", &red_mark_prob, py::arg("avg"), py::arg("params") = RedParams{});
  m.def("red_count_corrected", &red_count_corrected, py::arg("p_b"), py::arg("count"));

  m.def(
      "fred_adapt",
      [](double max_p, const std::string& last, double avg, const RedParams& red) {
        FredState s;
        s.max_p = max_p;
        s.last_action = last == "increased"   ? LastAction::increased
                         : last == "decreased" ? LastAction::decreased
                                               : LastAction::none;
        const FredState n = fred_adapt(s, avg, red);
        const char* act = n.last_action == LastAction::increased   ? "increased"
                          : n.last_action == LastAction::decreased ? "decreased"
                                                                   : "none";
        return py::make_tuple(n.max_p, act);
      },
      py::arg("max_p"), py::arg("last_action"), py::arg("avg"), py::arg("params") = RedParams{},
      "One FRED step; returns (max_p, last_action).");

  m.def(
      "ared_adapt",
      [](double max_p, double next_update, double avg, double now, const RedParams& red) {
        AredState s;
        s.max_p = max_p;
        s.next_update = next_update;
        const AredState n = ared_adapt(s, avg, red, now);
        return py::make_tuple(n.max_p, n.next_update);
      },
      py::arg("max_p"), py::arg("next_update"), py::arg("avg"), py::arg("now"),
      py::arg("params") = RedParams{}, "One ARED step; returns (max_p, next_update).");

  m.def(
      "pi_probability",
      [](double p, double q_prev, double q) {
        PiState s;
        s.p = p;
        s.q_prev = q_prev;
        return pi_probability(s, q, 0.0).p;
      },
      py::arg("p"), py::arg("q_prev"), py::arg("q"));

  m.def(
      "teacher",
      [](double avg, const RedParams& red, double p_base, double gain) {
        return teacher(avg, red, TeacherParams{p_base, gain});
      },
      py::arg("avg"), py::arg("params") = RedParams{}, py::arg("p_base") = TeacherParams{}.p_base,
      py::arg("gain") = TeacherParams{}.gain);

  m.def(
      "convergence_check",
      [](const std::vector<double>& window, const RedParams& red) { return convergence_check(window, red); },
      py::arg("window"), py::arg("params") = RedParams{});

  py::class_<SomMap, std::shared_ptr<SomMap>>(m, "SomMap")
      .def_property_readonly("rows", &SomMap::rows)
      .def_property_readonly("cols", &SomMap::cols)
      .def_property_readonly("frozen", &SomMap::frozen)
      .def("freeze", &SomMap::freeze)
      .def("respond", [](const SomMap& s, double x0, double x1) { return s.respond({x0, x1}); })
      .def("winner",
           [](const SomMap& s, double x0, double x1) {
             const GridCoord c = s.winner({x0, x1});
             return py::make_tuple(c.row, c.col);
           })
      .def("checksum", &SomMap::checksum)
      .def("__eq__", [](const SomMap& a, const SomMap& b) { return a == b; });

  m.def("save_map", [](const SomMap& map, const std::filesystem::path& path) { save_map(map, path); },
        py::arg("map"), py::arg("path"));
  m.def(
      "load_map",
      [](const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
        MapLoadOptions o;
        o.rows = rows;
        o.cols = cols;
        return std::make_shared<SomMap>(load_map(path, o));
      },
      py::arg("path"), py::arg("rows") = SomMap::kDefaultSide, py::arg("cols") = SomMap::kDefaultSide);

  m.def(
      "scenario_spec",
      [](const std::string& name, const std::string& overrides) {
        const ScenarioSpec s = build_scenario(name, parse_overrides(overrides));
        s.validate();
        py::dict d;
        d["name"] = s.name;
        d["duration"] = s.duration;
        d["aqm"] = s.aqm.name;
        d["seed"] = s.seed;
        d["packet_size"] = s.packet_size;
        d["max_flows"] = s.max_flows();
        d["bottleneck_bw"] = s.bottleneck_bw;
        return d;
      },
      py::arg("name"), py::arg("overrides") = "");

  m.def(
      "run_scenario",
      [](const std::string& name, const std::string& overrides, std::shared_ptr<SomMap> map, bool series) {
        ScenarioSpec spec = build_scenario(name, parse_overrides(overrides));
        spec.validate();
        if (spec.aqm.name == "kred" && !map) {
          if (spec.aqm.map_file.empty()) throw ConfigError("aqm 'kred' requires a map");
          map = std::make_shared<SomMap>(load_map(spec.aqm.map_file));
        }
        RunMetrics r;
        {
          py::gil_scoped_release nogil;
          r = run_scenario(spec, map);
        }
        return metrics_dict(r, series);
      },
      py::arg("name"), py::arg("overrides") = "", py::arg("map") = nullptr, py::arg("series") = false,
      "Runs one scenario. `overrides` is a JSON object in the config layout.");

  m.def(
      "kred_train",
      [](const std::string& overrides, std::uint64_t seed) {
        const ScenarioSpec spec = build_scenario("train", parse_overrides(overrides));
        spec.validate();
        std::optional<TrainingResult> res;
        {
          py::gil_scoped_release nogil;
          res.emplace(kred_train(spec, TrainingOptions{}, seed));
        }
        const TrainingResult& r = *res;
        py::dict d;
        d["map"] = std::make_shared<SomMap>(r.map);
        d["converged"] = r.converged;
        d["converged_at"] = r.converged_at;
        d["train_steps"] = r.train_steps;
        d["report"] = r.report();
        return d;
      },
      py::arg("overrides") = "", py::arg("seed") = 42);

  m.def(
      "pole_balance_validate",
      [](std::uint64_t seed, std::size_t episodes) {
        ValidationReport r;
        {
          py::gil_scoped_release nogil;
          r = pole_balance_validate(pole_learn_params(), seed, episodes);
        }
        py::dict d;
        d["passed"] = r.passed;
        d["untrained_mean"] = r.untrained_mean;
        d["trained_mean"] = r.trained_mean;
        d["trained_min"] = r.trained_min;
        return d;
      },
      py::arg("seed") = 42, py::arg("episodes") = 200);

  m.def("cli", &run_cli, py::arg("args"), "Runs the aqmlab command line; returns its exit code.");
}
