#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tipo/aligner.hpp"
#include "tipo/cli.hpp"
#include "tipo/config.hpp"
#include "tipo/error.hpp"
#include "tipo/intensity.hpp"
#include "tipo/jsonl.hpp"
#include "tipo/pipeline.hpp"

namespace py = pybind11;
using namespace tipo;

// Values cross the boundary as JSON text; the Python side wraps with json.loads/dumps.

namespace {

Persona persona_arg(const std::string& s) {
  auto p = parse_persona(s);
  if (!p) throw ConfigError("unknown persona '" + s + "'");
  return *p;
}

}  // namespace

PYBIND11_MODULE(_tipo, m) {
  m.doc() = "trajectory preference optimization core";

  // translators run newest first, so the subclass goes last
  py::register_exception<Error>(m, "TipoError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("match_key", [](const std::string& step) { return match_key(step_from_json(json::parse(step))); });

  m.def("align", [](const std::string& pair) {
    return to_json(align_pair(pair_from_json(json::parse(pair)))).dump();
  });

  m.def("score_action", [](const std::string& step, const std::string& persona) {
    return score_action(step_from_json(json::parse(step)), persona_arg(persona), ScoreConfig{});
  });

  m.def(
      "intensity_weight",
      [](double delta, double delta_max, double gamma) {
        ScoreConfig c;
        c.delta_max = delta_max;
        c.gamma = gamma;
        c.validate();
        return intensity_weight(delta, c);
      },
      py::arg("delta"), py::arg("delta_max") = 4.0, py::arg("gamma") = 1.0);

  m.def(
      "default_config",
      [](const std::vector<std::string>& overrides) { return to_json(default_config_with(overrides)).dump(); },
      py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "generate",
      [](const std::vector<std::string>& overrides) {
        const auto ds = generate(default_config_with(overrides).gen);
        json out{{"tasks", json::array()}, {"pairs", json::array()}, {"splits", splits_to_json(ds.splits)}};
        for (const auto& t : ds.tasks) out["tasks"].push_back(to_json(t));
        for (const auto& p : build_preference_pairs(ds.pairs)) out["pairs"].push_back(to_json(p));
        return out.dump();
      },
      py::arg("overrides") = std::vector<std::string>{});

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release nogil;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
