#include <pybind11/pybind11.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "yoto/config.hpp"
#include "yoto/errors.hpp"
#include "yoto/experiments.hpp"
#include "yoto/export.hpp"
#include "yoto/gradcheck.hpp"
#include "yoto/harness.hpp"
#include "yoto/loss_layer.hpp"
#include "yoto/optimizers.hpp"

namespace py = pybind11;
using Vec = std::vector<double>;

namespace {

yoto::ExperimentConfig config_from_text(const std::string& text,
                                        const std::vector<std::string>& overrides) {
  auto entries = yoto::parse_config_text(text);
  for (const auto& o : overrides) yoto::apply_override(entries, o);
  return yoto::build_config(entries);
}

std::string run_training_json(const std::string& text, std::uint64_t seed,
                              const std::vector<std::string>& overrides) {
  const auto config = config_from_text(text, overrides);
  py::gil_scoped_release release;
  const yoto::RunOutput out = yoto::run_training(config, seed);
  nlohmann::json doc = yoto::to_json(out.result);
  doc["trajectory"] = nlohmann::json::array();
  for (const auto& r : out.trajectory) doc["trajectory"].push_back(yoto::to_json(r));
  doc["final_parameters"] = out.final_parameters;
  return doc.dump();
}

std::string grid_json(const std::string& text, const std::vector<std::string>& overrides) {
  const auto config = config_from_text(text, overrides);
  py::gil_scoped_release release;
  return yoto::to_json(yoto::run_grid_search(config)).dump();
}

std::string seed_study_json(const std::string& text, const std::vector<std::string>& overrides) {
  auto config = config_from_text(text, overrides);
  config.mode = yoto::TrainingMode::kYoto;
  py::gil_scoped_release release;
  return yoto::to_json(yoto::run_seed_study(config, config.seeds)).dump();
}

std::string gradcheck_json(std::size_t trials, double tol, std::size_t model_trials,
                           double model_tol, std::uint64_t seed) {
  yoto::GradCheckSuite suite;
  suite.hp.n_trials = trials;
  suite.hp.tolerance = tol;
  suite.hp.seed = seed;
  suite.model.n_trials = model_trials;
  suite.model.tolerance = model_tol;
  suite.model.seed = seed;
  return yoto::run_gradcheck_suite(suite).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_yoto, m) {
  m.doc() = "Bindings for the yoto C++ core";

  py::register_exception<yoto::PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<yoto::DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<yoto::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<yoto::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("softmax_weights", [](const Vec& mu) {
    return yoto::softmax_weights(yoto::HPExponents(mu)).values();
  }, py::arg("mu"));
  m.def("composite_loss", [](const Vec& lambda, const Vec& losses) {
    return yoto::composite_loss(yoto::LossWeights(lambda), losses);
  }, py::arg("weights"), py::arg("losses"));
  m.def("hp_gradient_empirical", [](const Vec& mu, const Vec& losses) {
    return yoto::hp_gradient_empirical(yoto::HPExponents(mu), losses);
  }, py::arg("mu"), py::arg("losses"));
  m.def("naive_exp_gradient", [](const Vec& mu, const Vec& losses) {
    return yoto::naive_exp_gradient(yoto::HPExponents(mu), losses);
  }, py::arg("mu"), py::arg("losses"));
  m.def("regularizer_value", [](const Vec& mu, double rho) {
    return yoto::regularizer_value(yoto::HPExponents(mu), rho);
  }, py::arg("mu"), py::arg("rho"));
  m.def("regularizer_gradient", [](const Vec& mu) {
    return yoto::regularizer_gradient(yoto::HPExponents(mu));
  }, py::arg("mu"));

  py::enum_<yoto::OptimizerKind>(m, "OptimizerKind")
      .value("SGDW", yoto::OptimizerKind::kSgdw)
      .value("ADAMW", yoto::OptimizerKind::kAdamw);
  py::enum_<yoto::ScheduleKind>(m, "ScheduleKind")
      .value("CONSTANT", yoto::ScheduleKind::kConstant)
      .value("COSINE", yoto::ScheduleKind::kCosine)
      .value("STEP", yoto::ScheduleKind::kStep);

  py::class_<yoto::OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init<>())
      .def_readwrite("kind", &yoto::OptimizerConfig::kind)
      .def_readwrite("alpha", &yoto::OptimizerConfig::alpha)
      .def_readwrite("beta1", &yoto::OptimizerConfig::beta1)
      .def_readwrite("beta2", &yoto::OptimizerConfig::beta2)
      .def_readwrite("adam_epsilon", &yoto::OptimizerConfig::adam_epsilon)
      .def_readwrite("weight_decay", &yoto::OptimizerConfig::weight_decay)
      .def_readwrite("hp_decay", &yoto::OptimizerConfig::hp_decay)
      .def_readwrite("init_epsilon", &yoto::OptimizerConfig::init_epsilon)
      .def_readwrite("grad_clip", &yoto::OptimizerConfig::grad_clip)
      .def_readwrite("total_steps", &yoto::OptimizerConfig::total_steps)
      .def_property(
          "schedule", [](const yoto::OptimizerConfig& c) { return c.schedule.kind; },
          [](yoto::OptimizerConfig& c, yoto::ScheduleKind k) { c.schedule.kind = k; })
      .def_property(
          "milestones", [](const yoto::OptimizerConfig& c) { return c.schedule.milestones; },
          [](yoto::OptimizerConfig& c, std::vector<std::int64_t> ms) {
            c.schedule.milestones = std::move(ms);
          })
      .def_property(
          "step_factor", [](const yoto::OptimizerConfig& c) { return c.schedule.factor; },
          [](yoto::OptimizerConfig& c, double f) { c.schedule.factor = f; });

  py::class_<yoto::ParamState>(m, "ParamState")
      .def(py::init<Vec>(), py::arg("w"))
      .def_readwrite("w", &yoto::ParamState::w)
      .def_readwrite("m", &yoto::ParamState::m)
      .def_readwrite("v", &yoto::ParamState::v)
      .def_readwrite("step", &yoto::ParamState::step);

  py::class_<yoto::HPState>(m, "HPState")
      .def(py::init([](const Vec& mu) { return yoto::HPState(yoto::HPExponents(mu)); }),
           py::arg("mu"))
      .def_property(
          "mu", [](const yoto::HPState& s) { return s.mu.values(); },
          [](yoto::HPState& s, const Vec& mu) { s.mu = yoto::HPExponents(mu); })
      .def_readwrite("n", &yoto::HPState::n)
      .def_readwrite("s", &yoto::HPState::s)
      .def_readwrite("step", &yoto::HPState::step);

  m.def("init_hp_state", &yoto::init_hp_state, py::arg("aux_count"), py::arg("epsilon"));
  m.def("schedule_multiplier", &yoto::schedule_multiplier, py::arg("t"), py::arg("config"));
  m.def("sgdw_yoto_step", [](const yoto::ParamState& p, const yoto::HPState& h, const Vec& g,
                             const Vec& hg, std::int64_t t, const yoto::OptimizerConfig& c) {
    return yoto::sgdw_yoto_step(p, h, g, hg, t, c);
  }, py::arg("params"), py::arg("hps"), py::arg("g"), py::arg("h"), py::arg("t"), py::arg("config"));
  m.def("adamw_yoto_step", [](const yoto::ParamState& p, const yoto::HPState& h, const Vec& g,
                              const Vec& hg, std::int64_t t, const yoto::OptimizerConfig& c) {
    return yoto::adamw_yoto_step(p, h, g, hg, t, c);
  }, py::arg("params"), py::arg("hps"), py::arg("g"), py::arg("h"), py::arg("t"), py::arg("config"));

  m.def("central_fd", [](const std::function<double(const Vec&)>& fn, const Vec& x, double h) {
    return yoto::central_fd([&](std::span<const double> p) { return fn(Vec(p.begin(), p.end())); },
                            x, h);
  }, py::arg("fn"), py::arg("x"), py::arg("h") = yoto::kDefaultFdStep);

  m.def("_gradcheck_json", &gradcheck_json, py::arg("trials") = 100, py::arg("tol") = 1e-6,
        py::arg("model_trials") = 50, py::arg("model_tol") = 1e-5, py::arg("seed") = 0);
  m.def("_run_training_json", &run_training_json, py::arg("config_text"), py::arg("seed") = 0,
        py::arg("overrides") = std::vector<std::string>{});
  m.def("_grid_json", &grid_json, py::arg("config_text"),
        py::arg("overrides") = std::vector<std::string>{});
  m.def("_seed_study_json", &seed_study_json, py::arg("config_text"),
        py::arg("overrides") = std::vector<std::string>{});
}
