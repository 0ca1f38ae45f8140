#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gammix/em.hpp"
#include "gammix/hierarchy.hpp"
#include "gammix/io.hpp"
#include "gammix/mixture.hpp"
#include "gammix/shifted_gamma.hpp"
#include "gammix/significance.hpp"
#include "gammix/special_functions.hpp"
#include "gammix/stats.hpp"
#include "gammix/vmf.hpp"

namespace py = pybind11;

namespace {

gammix::SimilarityMatrix matrix_from_rows(
    const std::vector<std::vector<double>>& rows) {
  gammix::SimilarityMatrix S;
  S.n_queries = rows.size();
  S.n_candidates = rows.empty() ? 0 : rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != S.n_candidates)
      throw std::invalid_argument("similarity matrix rows must be uniform");
    S.entries.insert(S.entries.end(), row.begin(), row.end());
  }
  S.validate();
  return S;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  using namespace gammix;
  mod.doc() =
      "Shifted-gamma mixture fitting, hierarchy simulation, and match "
      "significance for similarity scores";

  py::module_ sf_mod =
      mod.def_submodule("sf", "Special-function kernel");
  sf_mod.def("log_gamma", &sf::log_gamma, py::arg("a"));
  sf_mod.def("digamma", &sf::digamma, py::arg("a"));
  sf_mod.def("trigamma", &sf::trigamma, py::arg("a"));
  sf_mod.def("reg_lower_inc_gamma", &sf::reg_lower_inc_gamma, py::arg("a"),
             py::arg("x"));
  sf_mod.def("reg_upper_inc_gamma", &sf::reg_upper_inc_gamma, py::arg("a"),
             py::arg("x"));
  sf_mod.def("inv_reg_lower_inc_gamma", &sf::inv_reg_lower_inc_gamma,
             py::arg("a"), py::arg("p"));

  py::class_<ShiftedGamma>(mod, "ShiftedGamma")
      .def(py::init<double, double, double>(), py::arg("alpha"),
           py::arg("shift"), py::arg("rate"))
      .def_property_readonly("alpha", &ShiftedGamma::alpha)
      .def_property_readonly("shift", &ShiftedGamma::shift)
      .def_property_readonly("rate", &ShiftedGamma::rate)
      .def("log_pdf", &ShiftedGamma::log_pdf, py::arg("x"))
      .def("cdf", &ShiftedGamma::cdf, py::arg("x"))
      .def("sf", &ShiftedGamma::sf, py::arg("x"))
      .def("mean", &ShiftedGamma::mean)
      .def("variance", &ShiftedGamma::variance)
      .def("sample", &ShiftedGamma::sample, py::arg("n"), py::arg("seed"))
      .def("__repr__", [](const ShiftedGamma& g) {
        return "ShiftedGamma(alpha=" + std::to_string(g.alpha()) +
               ", shift=" + std::to_string(g.shift()) +
               ", rate=" + std::to_string(g.rate()) + ")";
      });

  py::class_<GammaMixture>(mod, "GammaMixture")
      .def(py::init<std::vector<ShiftedGamma>, std::vector<double>>(),
           py::arg("components"), py::arg("weights"))
      .def(py::init<ShiftedGamma>(), py::arg("component"))
      .def_property_readonly("n_states", &GammaMixture::n_states)
      .def_property_readonly("components", &GammaMixture::components)
      .def_property_readonly("weights", &GammaMixture::weights)
      .def("log_pdf", &GammaMixture::log_pdf, py::arg("x"))
      .def("cdf", &GammaMixture::cdf, py::arg("x"))
      .def("sf", &GammaMixture::sf, py::arg("x"))
      .def("mean", &GammaMixture::mean)
      .def("mass_outside", &GammaMixture::mass_outside)
      .def("sample", &GammaMixture::sample, py::arg("n"), py::arg("seed"));

  py::class_<VmfCosine>(mod, "VmfCosine")
      .def(py::init<int, double>(), py::arg("dim"), py::arg("kappa"))
      .def_property_readonly("kappa", &VmfCosine::kappa)
      .def("log_pdf", &VmfCosine::log_pdf, py::arg("t"))
      .def("mode", &VmfCosine::mode)
      .def("sample", &VmfCosine::sample, py::arg("n"), py::arg("seed"));

  py::class_<FitConfig>(mod, "FitConfig")
      .def(py::init<>())
      .def_readwrite("n_states", &FitConfig::n_states)
      .def_readwrite("max_iters", &FitConfig::max_iters)
      .def_readwrite("rel_ll_tol", &FitConfig::rel_ll_tol)
      .def_readwrite("warm_start", &FitConfig::warm_start)
      .def_readwrite("warm_fraction_iters", &FitConfig::warm_fraction_iters)
      .def_readwrite("warm_data_stride", &FitConfig::warm_data_stride)
      .def_readwrite("bisection_tol", &FitConfig::bisection_tol)
      .def_readwrite("c_margin", &FitConfig::c_margin)
      .def_readwrite("seed", &FitConfig::seed);

  py::class_<FitReport>(mod, "FitReport")
      .def_readonly("model", &FitReport::model)
      .def_readonly("log_likelihood", &FitReport::log_likelihood)
      .def_readonly("iterations_run", &FitReport::iterations_run)
      .def_readonly("converged", &FitReport::converged)
      .def_readonly("mass_outside", &FitReport::mass_outside)
      .def_readonly("per_iter_ll", &FitReport::per_iter_ll)
      .def_readonly("warm_switch_iter", &FitReport::warm_switch_iter)
      .def_readonly("c_clamp_events", &FitReport::c_clamp_events)
      .def_readonly("rescue_events", &FitReport::rescue_events)
      .def_readonly("n_samples", &FitReport::n_samples);

  mod.def(
      "fit",
      [](const std::vector<double>& values, const FitConfig& cfg) {
        return fit(ScoreSample{values, std::nullopt}, cfg);
      },
      py::arg("values"), py::arg("config") = FitConfig{},
      "Fit a shifted-gamma mixture to raw scores");
  mod.def("bic", &bic, py::arg("log_likelihood"), py::arg("n_states"),
          py::arg("n_samples"));

  py::class_<HierarchyConfig> hier_cfg(mod, "HierarchyConfig");
  py::enum_<HierarchyConfig::Query>(hier_cfg, "Query")
      .value("FIRST_LEAF", HierarchyConfig::Query::kFirstLeaf)
      .value("ROOT", HierarchyConfig::Query::kRoot);
  hier_cfg.def(py::init<>())
      .def_readwrite("depth_m", &HierarchyConfig::depth_m)
      .def_readwrite("ratio_eta", &HierarchyConfig::ratio_eta)
      .def_readwrite("degree_k", &HierarchyConfig::degree_k)
      .def_readwrite("dim_n", &HierarchyConfig::dim_n)
      .def_readwrite("seed", &HierarchyConfig::seed)
      .def_readwrite("sample_cap", &HierarchyConfig::sample_cap)
      .def_readwrite("query", &HierarchyConfig::query)
      .def_readwrite("drop_self", &HierarchyConfig::drop_self);

  py::class_<LabeledSimilarities>(mod, "LabeledSimilarities")
      .def_readonly("sims", &LabeledSimilarities::sims)
      .def_readonly("levels", &LabeledSimilarities::levels)
      .def_readonly("depth_m", &LabeledSimilarities::depth_m);

  mod.def("simulate", &simulate, py::arg("config"),
          "Hierarchical-clustering similarity simulation");
  mod.def("level_histogram", &level_histogram, py::arg("labeled"),
          py::arg("n_bins"));

  py::class_<Match>(mod, "Match")
      .def_readonly("query", &Match::query)
      .def_readonly("candidate", &Match::candidate)
      .def_readonly("similarity", &Match::similarity)
      .def_readonly("p_value", &Match::p_value);

  py::class_<MatchResult>(mod, "MatchResult")
      .def_readonly("per_query", &MatchResult::per_query)
      .def_readonly("combined_stat", &MatchResult::combined_stat)
      .def_readonly("combined_p", &MatchResult::combined_p)
      .def_readonly("any_clamped", &MatchResult::any_clamped);

  mod.def("p_value", &p_value, py::arg("model"), py::arg("x"),
          "Right-tail p-value of a similarity under a fitted model");
  mod.def(
      "best_matches",
      [](const std::vector<std::vector<double>>& rows,
         const std::vector<GammaMixture>& nulls, bool one_to_one) {
        return best_matches(matrix_from_rows(rows), nulls, one_to_one);
      },
      py::arg("similarities"), py::arg("nulls"), py::arg("one_to_one") = false);
  mod.def(
      "combine_p_values",
      [](const std::vector<double>& ps) {
        const CombineResult r = combine_p_values(ps);
        return py::make_tuple(r.stat, r.combined_p, r.clamped);
      },
      py::arg("p_values"), "Fisher combination: (stat, combined_p, clamped)");

  mod.def("cosine_similarities", &io::cosine_similarities, py::arg("query"),
          py::arg("docs"));
  mod.def("mean", [](const std::vector<double>& xs) { return mean(xs); },
          py::arg("values"));
  mod.def("variance",
          [](const std::vector<double>& xs) { return variance(xs); },
          py::arg("values"));
  mod.def("skewness",
          [](const std::vector<double>& xs) { return skewness(xs); },
          py::arg("values"));
}
