#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>

#include "dynaopt/config.hpp"
#include "dynaopt/env.hpp"
#include "dynaopt/errors.hpp"
#include "dynaopt/experiment.hpp"
#include "dynaopt/param_space.hpp"
#include "dynaopt/policy.hpp"
#include "dynaopt/reward.hpp"
#include "dynaopt/rng.hpp"

namespace py = pybind11;
using namespace dynaopt;

namespace {

ordered_json to_json(py::handle h) {
    if (h.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(h)) return h.cast<bool>();
    if (py::isinstance<py::int_>(h)) {
        try {
            return h.cast<std::uint64_t>();
        } catch (const py::cast_error&) {
            return h.cast<std::int64_t>();
        }
    }
    if (py::isinstance<py::float_>(h)) return h.cast<double>();
    if (py::isinstance<py::str>(h)) return h.cast<std::string>();
    if (py::isinstance<py::dict>(h)) {
        ordered_json o = ordered_json::object();
        for (auto item : h.cast<py::dict>()) {
            o[py::str(item.first).cast<std::string>()] = to_json(item.second);
        }
        return o;
    }
    if (py::isinstance<py::list>(h) || py::isinstance<py::tuple>(h)) {
        ordered_json a = ordered_json::array();
        for (auto item : h.cast<py::sequence>()) a.push_back(to_json(item));
        return a;
    }
    throw ConfigError("config values must be none/bool/int/float/str/list/dict");
}

py::object from_json(const ordered_json& j) {
    if (j.is_null()) return py::none();
    if (j.is_boolean()) return py::bool_(j.get<bool>());
    if (j.is_number_unsigned()) return py::int_(j.get<std::uint64_t>());
    if (j.is_number_integer()) return py::int_(j.get<std::int64_t>());
    if (j.is_number_float()) return py::float_(j.get<double>());
    if (j.is_string()) return py::str(j.get<std::string>());
    if (j.is_array()) {
        py::list out;
        for (const auto& e : j) out.append(from_json(e));
        return out;
    }
    py::dict out;
    for (auto it = j.begin(); it != j.end(); ++it) out[py::str(it.key())] = from_json(it.value());
    return out;
}

ActionVector action_of(const std::vector<int>& indices) {
    ActionVector a;
    a.indices = indices;
    return a;
}

}  // namespace

PYBIND11_MODULE(_dynaopt, m) {
    m.doc() = "Dyna-style REINFORCE optimizer for constrained parametric design";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<EvalError>(m, "EvalError", PyExc_RuntimeError);

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform01", &Rng::uniform01)
        .def("normal", &Rng::normal)
        .def("uniform_index", &Rng::uniform_index, py::arg("n"))
        .def("stream", &Rng::stream, py::arg("name"));

    m.def(
        "build_grid",
        [](double lo, double hi, int count, const std::string& scale) {
            return build_grid(lo, hi, count, grid_scale_from_name(scale));
        },
        py::arg("min"), py::arg("max"), py::arg("count"), py::arg("scale") = "log");

    py::class_<ParameterSpace>(m, "ParameterSpace")
        .def("__len__", &ParameterSpace::size)
        .def("names",
             [](const ParameterSpace& s) {
                 std::vector<std::string> names;
                 for (const ParamSpec& p : s.params()) names.push_back(p.name);
                 return names;
             })
        .def("grid_size", &ParameterSpace::grid_size, py::arg("i"))
        .def("grid",
             [](const ParameterSpace& s, std::size_t i) { return s.param(i).grid; },
             py::arg("i"))
        .def("index_of", &ParameterSpace::index_of, py::arg("name"))
        .def("valid",
             [](const ParameterSpace& s, const std::vector<int>& a) {
                 return s.valid(action_of(a));
             },
             py::arg("action"))
        .def("decode",
             [](const ParameterSpace& s, const std::vector<int>& a) {
                 return s.decode(action_of(a));
             },
             py::arg("action"))
        .def("normalize",
             [](const ParameterSpace& s, const std::vector<int>& a) {
                 return s.normalize(action_of(a));
             },
             py::arg("action"))
        .def("log10_cardinality", &ParameterSpace::log10_cardinality);

    m.def("default_opamp_space", &default_opamp_space);

    py::class_<ConstraintSpec>(m, "ConstraintSpec")
        .def(py::init<>())
        .def_readwrite("metric", &ConstraintSpec::metric)
        .def_readwrite("lower", &ConstraintSpec::lower)
        .def_readwrite("upper", &ConstraintSpec::upper)
        .def_readwrite("weight", &ConstraintSpec::weight)
        .def_readwrite("unit", &ConstraintSpec::unit)
        .def_readwrite("objective", &ConstraintSpec::objective);

    py::class_<RewardValue>(m, "RewardValue")
        .def_readonly("total", &RewardValue::total)
        .def_readonly("per_metric", &RewardValue::per_metric);

    m.def("default_constraints", &default_constraints);
    m.def("score", &score, py::arg("constraints"), py::arg("metrics"));
    m.def("worst_reward", &worst_reward, py::arg("constraints"));

    py::class_<OpAmpModelConfig>(m, "OpAmpModelConfig")
        .def(py::init<>())
        .def_readwrite("kn", &OpAmpModelConfig::kn)
        .def_readwrite("kp", &OpAmpModelConfig::kp)
        .def_readwrite("lambda_n", &OpAmpModelConfig::lambda_n)
        .def_readwrite("lambda_p", &OpAmpModelConfig::lambda_p)
        .def_readwrite("i_ref", &OpAmpModelConfig::i_ref)
        .def_readwrite("c_load", &OpAmpModelConfig::c_load)
        .def_readwrite("c_par", &OpAmpModelConfig::c_par)
        .def_readwrite("vdd", &OpAmpModelConfig::vdd);

    m.def(
        "opamp_evaluate",
        [](const OpAmpModelConfig& cfg, const ParameterSpace& space,
           const std::vector<int>& a) { return opamp_evaluate(cfg, space, action_of(a)); },
        py::arg("config"), py::arg("space"), py::arg("action"));

    py::class_<Evaluator>(m, "Evaluator")
        .def(
            "evaluate",
            [](Evaluator& env, const std::vector<int>& a) { return env.evaluate(action_of(a)); },
            py::arg("action"))
        .def("pure", &Evaluator::pure);

    m.def(
        "make_env",
        [](const std::string& phase, const OpAmpModelConfig& cfg, const ParameterSpace& space) {
            return make_env(phase_from_name(phase), cfg, space);
        },
        py::arg("phase"), py::arg("config"), py::arg("space"));

    py::class_<PolicyGenerator>(m, "PolicyGenerator")
        .def("__len__", &PolicyGenerator::size)
        .def_readonly("grid_sizes", &PolicyGenerator::grid_sizes);

    m.def(
        "make_policy",
        [](const ParameterSpace& space, int hidden_size, Rng& rng) {
            return make_policy(space, hidden_size, rng);
        },
        py::arg("space"), py::arg("hidden_size"), py::arg("rng"));
    m.def(
        "sample_noise",
        [](std::size_t t, Rng& rng) { return sample_noise(t, rng).z; }, py::arg("t"),
        py::arg("rng"));
    m.def(
        "policy_sample",
        [](const PolicyGenerator& policy, const std::vector<double>& z, Rng& rng) {
            const SampledAction s = sample(policy, NoiseVector{z}, rng);
            return py::make_tuple(s.action.indices, s.log_prob);
        },
        py::arg("policy"), py::arg("z"), py::arg("rng"));
    m.def(
        "policy_log_prob",
        [](const PolicyGenerator& policy, const std::vector<double>& z,
           const std::vector<int>& a) { return log_prob(policy, NoiseVector{z}, action_of(a)); },
        py::arg("policy"), py::arg("z"), py::arg("action"));
    m.def(
        "policy_entropy",
        [](const PolicyGenerator& policy, const std::vector<double>& z) {
            return entropy(policy, NoiseVector{z});
        },
        py::arg("policy"), py::arg("z"));

    m.def(
        "resolve_config",
        [](py::dict config) {
            return from_json(experiment_config_to_json(parse_experiment_config(to_json(config))));
        },
        py::arg("config"), "Validate a config dict and return it with defaults filled in.");
    m.def(
        "run_experiment",
        [](py::dict config, bool overwrite) {
            const ExperimentConfig cfg = parse_experiment_config(to_json(config));
            return from_json(run_summary_to_json(run_experiment(cfg, overwrite)));
        },
        py::arg("config"), py::arg("overwrite") = false,
        "Run one experiment end to end; returns the summary and writes artifacts.");

    m.attr("__all__") = std::vector<std::string>{
        "Rng",          "build_grid",      "ParameterSpace", "default_opamp_space",
        "ConstraintSpec", "RewardValue",   "default_constraints", "score",
        "worst_reward", "OpAmpModelConfig", "opamp_evaluate", "Evaluator",
        "make_env",     "PolicyGenerator", "make_policy",    "sample_noise",
        "policy_sample", "policy_log_prob", "policy_entropy", "resolve_config",
        "run_experiment", "ConfigError",   "EvalError"};
}
