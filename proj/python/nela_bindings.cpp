#include <map>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nela/baselines.hpp"
#include "nela/environment.hpp"
#include "nela/errors.hpp"
#include "nela/graph.hpp"
#include "nela/harness.hpp"
#include "nela/metrics.hpp"
#include "nela/nela_policy.hpp"
#include "nela/sparse_regression.hpp"

namespace py = pybind11;
using namespace nela;

namespace {

// Settings use the CLI flag names; values arrive as strings.
ExperimentConfig config_from(const std::map<std::string, std::string>& settings) {
  ExperimentConfig c;
  for (const auto& [k, v] : settings) apply_setting(c, k, v);
  c.validate();
  return c;
}

py::dict aggregate_columns(const Aggregate& agg) {
  const auto k = static_cast<Eigen::Index>(agg.rows.size());
  Eigen::VectorXd t(k), cum(k), cum_se(k), prec(k), rec(k), det(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& r = agg.rows[static_cast<std::size_t>(i)];
    t(i) = static_cast<double>(r.t);
    cum(i) = r.cum_regret_mean;
    cum_se(i) = r.cum_regret_se;
    prec(i) = r.precision_mean;
    rec(i) = r.recall_mean;
    det(i) = r.detected_count_mean;
  }
  py::dict d;
  d["t"] = t;
  d["cum_regret_mean"] = cum;
  d["cum_regret_se"] = cum_se;
  d["precision_mean"] = prec;
  d["recall_mean"] = rec;
  d["detected_count_mean"] = det;
  d["seed_count"] = agg.seed_count;
  return d;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_nela, m) {
  m.doc() = "Networked LinUCB with anomaly detection";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<LoadError>(m, "LoadError", PyExc_IOError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<InfluenceMatrix>(m, "InfluenceMatrix")
      .def_static("from_matrix", &InfluenceMatrix::from_matrix, py::arg("w"),
                  py::arg("renormalize_tol") = 1e-9)
      .def_static("identity", &InfluenceMatrix::identity)
      .def_property_readonly("n", &InfluenceMatrix::n)
      .def_property_readonly("matrix", &InfluenceMatrix::matrix)
      .def("support", &InfluenceMatrix::support);

  m.def("build_uniform_graph", &build_uniform_graph, py::arg("edges"), py::arg("n"));
  m.def("build_similarity_graph", &build_similarity_graph, py::arg("theta"),
        py::arg("keep_fraction"));
  m.def("complete_edges", &complete_edges);
  m.def("star_edges", &star_edges, py::arg("n"), py::arg("center") = 0);

  m.def("mixed_feature", &mixed_feature, py::arg("arm"), py::arg("user"), py::arg("w"));

  py::class_<RegressionHistory>(m, "RegressionHistory")
      .def(py::init<int, int>(), py::arg("n"), py::arg("d"))
      .def("append",
           py::overload_cast<int, const Eigen::Ref<const Eigen::VectorXd>&, double>(
               &RegressionHistory::append),
           py::arg("user"), py::arg("arm"), py::arg("target"))
      .def("__len__", &RegressionHistory::size)
      .def("design", &RegressionHistory::dense_design)
      .def("targets", &RegressionHistory::targets);

  m.def("lambda_schedule", &lambda_schedule, py::arg("t"), py::arg("n"), py::arg("d"),
        py::arg("lambda0"));
  m.def(
      "lasso_solve",
      [](const RegressionHistory& h, double lambda, double tol, int max_sweeps) {
        LassoOptions opt;
        opt.tol = tol;
        opt.max_sweeps = max_sweeps;
        const auto fit = lasso_solve(h, lambda, opt);
        py::dict d;
        d["coef"] = fit.coef;
        d["objective"] = fit.objective;
        d["sweeps"] = fit.sweeps;
        d["duality_gap"] = fit.duality_gap;
        return d;
      },
      py::arg("history"), py::arg("lam"), py::arg("tol") = 1e-8, py::arg("max_sweeps") = 10000);
  m.def(
      "two_stage_threshold",
      [](const Eigen::VectorXd& v0, double lambda_t) {
        const auto s = two_stage_threshold(v0, lambda_t);
        return py::make_tuple(s.j0, s.j1);
      },
      py::arg("coef"), py::arg("lambda_t"));
  m.def("restricted_least_squares", &restricted_least_squares, py::arg("history"),
        py::arg("support"));

  py::class_<NelaConfig>(m, "NelaConfig")
      .def(py::init<>())
      .def_readwrite("lambda1", &NelaConfig::lambda1)
      .def_readwrite("lambda0", &NelaConfig::lambda0)
      .def_readwrite("sigma", &NelaConfig::sigma)
      .def_readwrite("delta", &NelaConfig::delta)
      .def_readwrite("s_x", &NelaConfig::s_x)
      .def_readwrite("s_v", &NelaConfig::s_v)
      .def_readwrite("s_theta", &NelaConfig::s_theta)
      .def_readwrite("warmup_rounds", &NelaConfig::warmup_rounds)
      .def_readwrite("lasso_every", &NelaConfig::lasso_every)
      .def_readwrite("residual_enabled", &NelaConfig::residual_enabled)
      .def_readwrite("refresh_targets", &NelaConfig::refresh_targets);

  py::class_<NelaPolicy>(m, "NelaPolicy")
      .def(py::init<InfluenceMatrix, int, NelaConfig>(), py::arg("w"), py::arg("d"),
           py::arg("config") = NelaConfig{})
      .def(
          "select",
          [](const NelaPolicy& p, int user, const Eigen::MatrixXd& arms) {
            return p.select(user, ArmSet{arms});
          },
          py::arg("user"), py::arg("arms"))
      .def("update", &NelaPolicy::update, py::arg("user"), py::arg("arm"), py::arg("reward"))
      .def("detected_anomalies", &NelaPolicy::detected_anomalies)
      .def_property_readonly("alpha", [](const NelaPolicy& p) { return alpha(p.state(), p.config()); })
      .def_property_readonly("t", [](const NelaPolicy& p) { return p.state().t; })
      .def_property_readonly("theta_hat", [](const NelaPolicy& p) { return Eigen::MatrixXd(p.state().theta_matrix()); })
      .def_property_readonly("v_hat", [](const NelaPolicy& p) { return Eigen::MatrixXd(p.state().v_matrix()); })
      .def("snapshot", [](const NelaPolicy& p) { return json_to_py(snapshot(p.state())); });

  m.def("precision_recall", &precision_recall, py::arg("detected"), py::arg("truth"));

  m.def(
      "run_experiment",
      [](const std::map<std::string, std::string>& settings) {
        const ExperimentConfig c = config_from(settings);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        py::dict aggs;
        for (const auto& a : r.aggregates) {
          py::dict cols = aggregate_columns(a);
          cols["growth_exponent"] = growth_exponent(a);
          aggs[py::str(a.policy)] = cols;
        }
        return py::make_tuple(json_to_py(r.summary), aggs);
      },
      py::arg("settings"));

  m.def("config_json", [](const std::map<std::string, std::string>& settings) {
    return json_to_py(config_from(settings).to_json());
  });
}
