#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "jumphk/runner.hpp"

namespace py = pybind11;

namespace {

// subcommand-shaped entry points; every heavy type stays on the C++ side and
// crosses the boundary as JSON text
py::tuple py_validate(const std::string& config_text) {
  std::ostringstream log;
  const int rc = jumphk::cmd_validate(config_text, log);
  return py::make_tuple(rc, log.str());
}

py::tuple py_run(const std::string& config_text, const std::vector<std::string>& claims,
                 bool skip_validate) {
  std::ostringstream log;
  const int rc = jumphk::cmd_run(config_text, claims, skip_validate, log);
  return py::make_tuple(rc, log.str());
}

std::string py_run_claim(const std::string& config_text, const std::string& claim_id) {
  const jumphk::ExperimentConfig cfg = jumphk::parse_config(config_text);
  const std::uint64_t digest = jumphk::config_digest(config_text);
  const jumphk::ClaimCheck c = jumphk::run_claim(cfg, claim_id);
  return jumphk::claim_report_json(c, digest, cfg.mc.seed);
}

std::string py_export_operator(const std::string& config_text) {
  const jumphk::ExperimentConfig cfg = jumphk::parse_config(config_text);
  return jumphk::DiscreteGenerator::assemble(cfg.model, cfg.grid).export_text();
}

py::tuple py_heat_row(const std::string& config_text, double t) {
  const jumphk::ExperimentConfig cfg = jumphk::parse_config(config_text);
  const jumphk::DiscreteGenerator gen =
      jumphk::DiscreteGenerator::assemble(cfg.model, cfg.grid);
  const int src = gen.nearest_node(jumphk::vec0());
  const Eigen::VectorXd row = gen.heat_row(t, src);
  std::vector<std::vector<double>> nodes;
  nodes.reserve(gen.size());
  for (int i = 0; i < gen.size(); ++i) {
    const jumphk::Vec& x = gen.node(i);
    nodes.emplace_back(x.begin(), x.begin() + gen.dim());
  }
  return py::make_tuple(src, nodes, std::vector<double>(row.data(), row.data() + row.size()));
}

std::string py_digest(const std::string& config_text) {
  return jumphk::digest_hex(jumphk::config_digest(config_text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "jump-diffusion simulator and estimator suite";
#ifdef JUMPHK_VERSION
  m.attr("__version__") = JUMPHK_VERSION;
#else
  m.attr("__version__") = "0.0.0";
#endif
  m.def("claim_ids", [] { return jumphk::claim_ids(); },
        "registered claim identifiers");
  m.def("claim_description", &jumphk::claim_description, py::arg("claim_id"));
  m.def("config_digest", &py_digest, py::arg("config_text"),
        "canonical config digest as 16 hex digits");
  m.def("validate", &py_validate, py::arg("config_text"),
        "(exit_code, log) of the assumption checks; writes validation.json");
  m.def("run", &py_run, py::arg("config_text"), py::arg("claims") = std::vector<std::string>{},
        py::arg("skip_validate") = false,
        "(exit_code, log) of a full claim run; writes report files");
  m.def("run_claim", &py_run_claim, py::arg("config_text"), py::arg("claim_id"),
        "single claim report as a JSON string; writes nothing");
  m.def("export_operator", &py_export_operator, py::arg("config_text"),
        "discrete generator in the text export format");
  m.def("heat_row", &py_heat_row, py::arg("config_text"), py::arg("t"),
        "(source index, node coordinates, transition mass) at time t from the origin");
}
