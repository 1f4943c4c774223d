#include "dynaopt/config.hpp"

#include <set>
#include <utility>

#include "dynaopt/errors.hpp"

namespace dynaopt {

namespace {

// Strict object reader: typed getters with defaults, dotted-path error
// accumulation, and an unknown-key sweep in finish().
class Reader {
public:
    Reader(const ordered_json* j, std::string path, std::vector<std::string>& errors)
        : j_(j), path_(std::move(path)), errors_(&errors) {
        if (j_ && !j_->is_object()) {
            fail("expected an object");
            j_ = nullptr;
        }
    }

    bool present(const char* key) const { return j_ && j_->contains(key); }

    double number(const char* key, double def) {
        const ordered_json* v = take(key);
        if (!v) return def;
        if (!v->is_number()) return fail_key(key, "expected a number"), def;
        return v->get<double>();
    }

    double number_required(const char* key) {
        if (!present(key) && j_) {
            fail_key(key, "required");
            return 0.0;
        }
        return number(key, 0.0);
    }

    long integer(const char* key, long def) {
        const ordered_json* v = take(key);
        if (!v) return def;
        if (!v->is_number_integer()) return fail_key(key, "expected an integer"), def;
        return v->get<long>();
    }

    std::uint64_t uint64(const char* key, std::uint64_t def) {
        const ordered_json* v = take(key);
        if (!v) return def;
        if (v->is_number_unsigned()) return v->get<std::uint64_t>();
        if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
            return static_cast<std::uint64_t>(v->get<std::int64_t>());
        }
        return fail_key(key, "expected a non-negative integer"), def;
    }

    bool boolean(const char* key, bool def) {
        const ordered_json* v = take(key);
        if (!v) return def;
        if (!v->is_boolean()) return fail_key(key, "expected a boolean"), def;
        return v->get<bool>();
    }

    std::string str(const char* key, std::string def) {
        const ordered_json* v = take(key);
        if (!v) return def;
        if (!v->is_string()) return fail_key(key, "expected a string"), def;
        return v->get<std::string>();
    }

    std::string str_required(const char* key) {
        if (!present(key) && j_) {
            fail_key(key, "required");
            return {};
        }
        return str(key, {});
    }

    std::optional<double> opt_number(const char* key) {
        const ordered_json* v = take(key);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_number()) return fail_key(key, "expected a number or null"), std::nullopt;
        return v->get<double>();
    }

    Reader child(const char* key) {
        const ordered_json* v = take(key);
        return Reader(v, join(key), *errors_);
    }

    const ordered_json* array(const char* key) {
        const ordered_json* v = take(key);
        if (!v) return nullptr;
        if (!v->is_array()) return fail_key(key, "expected an array"), nullptr;
        return v;
    }

    std::string join(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    void finish() {
        if (!j_) return;
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            if (!used_.count(it.key())) {
                errors_->push_back(join(it.key().c_str()) + ": unknown key");
            }
        }
    }

private:
    const ordered_json* take(const char* key) {
        if (!present(key)) return nullptr;
        used_.insert(key);
        return &(*j_)[key];
    }
    void fail(const std::string& msg) {
        errors_->push_back((path_.empty() ? "config" : path_) + ": " + msg);
    }
    void fail_key(const char* key, const std::string& msg) {
        errors_->push_back(join(key) + ": " + msg);
    }

    const ordered_json* j_;  // null: absent subtree, getters yield defaults
    std::string path_;
    std::vector<std::string>* errors_;
    std::set<std::string> used_;
};

template <typename Enum, typename Fn>
Enum parse_enum(const std::string& text, Enum def, Fn from_name, const std::string& path,
                std::vector<std::string>& errors) {
    try {
        return from_name(text);
    } catch (const ConfigError& e) {
        errors.push_back(path + ": " + e.what());
        return def;
    }
}

std::vector<ParamSpec> parse_space(const ordered_json* arr, const std::string& path,
                                   std::vector<std::string>& errors) {
    std::vector<ParamSpec> specs;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string entry_path = path + "[" + std::to_string(i) + "]";
        Reader entry(&(*arr)[i], entry_path, errors);
        ParamSpec spec;
        spec.name = entry.str_required("name");
        spec.unit = entry.str("unit", "");
        spec.scale = parse_enum(entry.str("scale", "log"), GridScale::Log, grid_scale_from_name,
                                entry.join("scale"), errors);
        const double lo = entry.number_required("min");
        const double hi = entry.number_required("max");
        const long count = entry.integer("count", 100);
        entry.finish();
        try {
            spec.grid = build_grid(lo, hi, static_cast<int>(count), spec.scale);
        } catch (const std::exception& e) {
            errors.push_back(entry_path + ": " + e.what());
            continue;
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

std::vector<ConstraintSpec> parse_constraints(const ordered_json* arr, const std::string& path,
                                              std::vector<std::string>& errors) {
    std::vector<ConstraintSpec> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        Reader entry(&(*arr)[i], path + "[" + std::to_string(i) + "]", errors);
        ConstraintSpec c;
        c.metric = entry.str_required("metric");
        c.lower = entry.opt_number("lower");
        c.upper = entry.opt_number("upper");
        c.weight = entry.number("weight", 1.0);
        c.unit = entry.str("unit", "");
        c.objective = entry.boolean("objective", false);
        entry.finish();
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace

std::string env_kind_name(EnvKind k) {
    switch (k) {
        case EnvKind::Schematic: return "schematic";
        case EnvKind::PostLayout: return "post_layout";
        case EnvKind::External: return "external";
    }
    return "schematic";
}

EnvKind env_kind_from_name(const std::string& name) {
    if (name == "schematic") return EnvKind::Schematic;
    if (name == "post_layout") return EnvKind::PostLayout;
    if (name == "external") return EnvKind::External;
    throw ConfigError("unknown env kind: " + name);
}

ExperimentConfig parse_experiment_config(const ordered_json& j) {
    std::vector<std::string> errors;
    Reader root(&j, "", errors);
    ExperimentConfig cfg;
    cfg.trainer.mode = TrainerMode::Dyna;

    cfg.seed = root.uint64("seed", cfg.seed);
    cfg.output_dir = root.str("output_dir", cfg.output_dir);
    cfg.trainer.mode = parse_enum(root.str("mode", trainer_mode_name(cfg.trainer.mode)),
                                  cfg.trainer.mode, trainer_mode_from_name, "mode", errors);

    Reader env = root.child("env");
    cfg.env_kind = parse_enum(env.str("kind", env_kind_name(cfg.env_kind)), cfg.env_kind,
                              env_kind_from_name, "env.kind", errors);
    Reader model = env.child("model");
    cfg.model.kn = model.number("kn", cfg.model.kn);
    cfg.model.kp = model.number("kp", cfg.model.kp);
    cfg.model.lambda_n = model.number("lambda_n", cfg.model.lambda_n);
    cfg.model.lambda_p = model.number("lambda_p", cfg.model.lambda_p);
    cfg.model.i_ref = model.number("i_ref", cfg.model.i_ref);
    cfg.model.c_load = model.number("c_load", cfg.model.c_load);
    cfg.model.c_par = model.number("c_par", cfg.model.c_par);
    cfg.model.vdd = model.number("vdd", cfg.model.vdd);
    model.finish();
    Reader ext = env.child("external");
    if (const ordered_json* cmd = ext.array("command")) {
        cfg.external.command.clear();
        for (std::size_t i = 0; i < cmd->size(); ++i) {
            if (!(*cmd)[i].is_string()) {
                errors.push_back("env.external.command[" + std::to_string(i) +
                                 "]: expected a string");
            } else {
                cfg.external.command.push_back((*cmd)[i].get<std::string>());
            }
        }
    }
    cfg.external.timeout_seconds = ext.number("timeout_seconds", cfg.external.timeout_seconds);
    cfg.external.process_cap =
        static_cast<int>(ext.integer("process_cap", cfg.external.process_cap));
    cfg.external.pure = ext.boolean("pure", cfg.external.pure);
    ext.finish();
    env.finish();

    if (root.present("space")) {
        if (const ordered_json* arr = root.array("space")) {
            const std::vector<ParamSpec> specs = parse_space(arr, "space", errors);
            if (errors.empty()) {
                try {
                    cfg.space = ParameterSpace(specs);
                } catch (const std::exception& e) {
                    errors.push_back(std::string("space: ") + e.what());
                }
            }
        }
    }
    if (root.present("constraints")) {
        if (const ordered_json* arr = root.array("constraints")) {
            cfg.constraints = parse_constraints(arr, "constraints", errors);
        }
    }

    Reader trainer = root.child("trainer");
    cfg.trainer.total_steps = trainer.integer("total_steps", cfg.trainer.total_steps);
    cfg.trainer.cycles = static_cast<int>(trainer.integer("cycles", cfg.trainer.cycles));
    cfg.trainer.n_direct = static_cast<int>(trainer.integer("n_direct", cfg.trainer.n_direct));
    cfg.trainer.n_model = static_cast<int>(trainer.integer("n_model", cfg.trainer.n_model));
    cfg.trainer.eval_samples =
        static_cast<int>(trainer.integer("eval_samples", cfg.trainer.eval_samples));
    cfg.trainer.early_stop_epsilon = trainer.present("early_stop_epsilon")
                                         ? trainer.opt_number("early_stop_epsilon")
                                         : cfg.trainer.early_stop_epsilon;
    cfg.trainer.buffer_window = trainer.integer("buffer_window", cfg.trainer.buffer_window);
    cfg.trainer.head_mode =
        parse_enum(trainer.str("head_mode", head_mode_name(cfg.trainer.head_mode)),
                   cfg.trainer.head_mode, head_mode_from_name, "trainer.head_mode", errors);
    Reader policy = trainer.child("policy");
    cfg.trainer.policy.learning_rate =
        policy.number("learning_rate", cfg.trainer.policy.learning_rate);
    cfg.trainer.policy.entropy_coeff =
        policy.number("entropy_coeff", cfg.trainer.policy.entropy_coeff);
    cfg.trainer.policy.baseline_decay =
        policy.number("baseline_decay", cfg.trainer.policy.baseline_decay);
    cfg.trainer.policy.optimizer =
        parse_enum(policy.str("optimizer", optimizer_name(cfg.trainer.policy.optimizer)),
                   cfg.trainer.policy.optimizer, optimizer_from_name,
                   "trainer.policy.optimizer", errors);
    cfg.trainer.policy.hidden_size =
        static_cast<int>(policy.integer("hidden_size", cfg.trainer.policy.hidden_size));
    cfg.trainer.policy.entropy_in_model_loop =
        policy.boolean("entropy_in_model_loop", cfg.trainer.policy.entropy_in_model_loop);
    cfg.trainer.policy.separate_model_baseline =
        policy.boolean("separate_model_baseline", cfg.trainer.policy.separate_model_baseline);
    policy.finish();
    Reader regression = trainer.child("regression");
    cfg.trainer.regression.epochs =
        static_cast<int>(regression.integer("epochs", cfg.trainer.regression.epochs));
    cfg.trainer.regression.batch_size =
        static_cast<int>(regression.integer("batch_size", cfg.trainer.regression.batch_size));
    cfg.trainer.regression.learning_rate =
        regression.number("learning_rate", cfg.trainer.regression.learning_rate);
    cfg.trainer.regression.holdout_fraction =
        regression.number("holdout_fraction", cfg.trainer.regression.holdout_fraction);
    cfg.trainer.regression.optimizer = parse_enum(
        regression.str("optimizer", optimizer_name(cfg.trainer.regression.optimizer)),
        cfg.trainer.regression.optimizer, optimizer_from_name, "trainer.regression.optimizer",
        errors);
    regression.finish();
    trainer.finish();

    Reader transfer = root.child("transfer");
    cfg.transfer.policy_checkpoint = transfer.str("policy_checkpoint", {});
    cfg.transfer.buffer_path = transfer.str("buffer_path", {});
    transfer.finish();
    Reader model_based = root.child("model_based");
    cfg.model_based.model_checkpoint = model_based.str("model_checkpoint", {});
    cfg.model_based.policy_checkpoint = model_based.str("policy_checkpoint", {});
    model_based.finish();
    root.finish();

    // Semantic checks, still accumulated so one pass reports everything.
    const auto check = [&errors](const char* where, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            errors.push_back(std::string(where) + ": " + e.what());
        }
    };
    check("env.model", [&] { validate_opamp_config(cfg.model); });
    check("constraints", [&] { validate_constraints(cfg.constraints); });
    check("trainer", [&] { validate_trainer_config(cfg.trainer); });
    if (cfg.env_kind == EnvKind::External) {
        if (cfg.external.command.empty()) {
            errors.push_back("env.external.command: required for env.kind = external");
        }
        if (!(cfg.external.timeout_seconds > 0.0)) {
            errors.push_back("env.external.timeout_seconds: must be positive");
        }
        if (cfg.external.process_cap < 1) {
            errors.push_back("env.external.process_cap: must be >= 1");
        }
    }
    if (cfg.trainer.mode == TrainerMode::Transfer) {
        if (cfg.transfer.policy_checkpoint.empty()) {
            errors.push_back("transfer.policy_checkpoint: required for mode = transfer");
        }
        if (cfg.transfer.buffer_path.empty()) {
            errors.push_back("transfer.buffer_path: required for mode = transfer");
        }
    }
    if (cfg.trainer.mode == TrainerMode::ModelBased &&
        cfg.model_based.model_checkpoint.empty()) {
        errors.push_back("model_based.model_checkpoint: required for mode = model_based");
    }

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const std::string& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    ordered_json j;
    try {
        j = load_json_file(path);
    } catch (const EvalError& e) {
        throw ConfigError(e.what());
    }
    return parse_experiment_config(j);
}

ordered_json experiment_config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["mode"] = trainer_mode_name(cfg.trainer.mode);
    j["output_dir"] = cfg.output_dir;
    ordered_json env;
    env["kind"] = env_kind_name(cfg.env_kind);
    ordered_json model;
    model["kn"] = cfg.model.kn;
    model["kp"] = cfg.model.kp;
    model["lambda_n"] = cfg.model.lambda_n;
    model["lambda_p"] = cfg.model.lambda_p;
    model["i_ref"] = cfg.model.i_ref;
    model["c_load"] = cfg.model.c_load;
    model["c_par"] = cfg.model.c_par;
    model["vdd"] = cfg.model.vdd;
    env["model"] = std::move(model);
    if (cfg.env_kind == EnvKind::External) {
        ordered_json ext;
        ext["command"] = cfg.external.command;
        ext["timeout_seconds"] = cfg.external.timeout_seconds;
        ext["process_cap"] = cfg.external.process_cap;
        ext["pure"] = cfg.external.pure;
        env["external"] = std::move(ext);
    }
    j["env"] = std::move(env);
    ordered_json space = ordered_json::array();
    for (const ParamSpec& p : cfg.space.params()) {
        ordered_json entry;
        entry["name"] = p.name;
        entry["min"] = p.grid.front();
        entry["max"] = p.grid.back();
        entry["count"] = p.grid.size();
        entry["scale"] = grid_scale_name(p.scale);
        entry["unit"] = p.unit;
        space.push_back(std::move(entry));
    }
    j["space"] = std::move(space);
    ordered_json constraints = ordered_json::array();
    for (const ConstraintSpec& c : cfg.constraints) {
        ordered_json entry;
        entry["metric"] = c.metric;
        if (c.lower) entry["lower"] = *c.lower;
        if (c.upper) entry["upper"] = *c.upper;
        entry["weight"] = c.weight;
        entry["unit"] = c.unit;
        entry["objective"] = c.objective;
        constraints.push_back(std::move(entry));
    }
    j["constraints"] = std::move(constraints);
    ordered_json trainer;
    trainer["total_steps"] = cfg.trainer.total_steps;
    trainer["cycles"] = cfg.trainer.cycles;
    trainer["n_direct"] = cfg.trainer.n_direct;
    trainer["n_model"] = cfg.trainer.n_model;
    trainer["eval_samples"] = cfg.trainer.eval_samples;
    if (cfg.trainer.early_stop_epsilon) {
        trainer["early_stop_epsilon"] = *cfg.trainer.early_stop_epsilon;
    }
    trainer["buffer_window"] = cfg.trainer.buffer_window;
    trainer["head_mode"] = head_mode_name(cfg.trainer.head_mode);
    ordered_json policy;
    policy["learning_rate"] = cfg.trainer.policy.learning_rate;
    policy["entropy_coeff"] = cfg.trainer.policy.entropy_coeff;
    policy["baseline_decay"] = cfg.trainer.policy.baseline_decay;
    policy["optimizer"] = optimizer_name(cfg.trainer.policy.optimizer);
    policy["hidden_size"] = cfg.trainer.policy.hidden_size;
    policy["entropy_in_model_loop"] = cfg.trainer.policy.entropy_in_model_loop;
    policy["separate_model_baseline"] = cfg.trainer.policy.separate_model_baseline;
    trainer["policy"] = std::move(policy);
    ordered_json regression;
    regression["epochs"] = cfg.trainer.regression.epochs;
    regression["batch_size"] = cfg.trainer.regression.batch_size;
    regression["learning_rate"] = cfg.trainer.regression.learning_rate;
    regression["holdout_fraction"] = cfg.trainer.regression.holdout_fraction;
    regression["optimizer"] = optimizer_name(cfg.trainer.regression.optimizer);
    trainer["regression"] = std::move(regression);
    j["trainer"] = std::move(trainer);
    if (!cfg.transfer.policy_checkpoint.empty() || !cfg.transfer.buffer_path.empty()) {
        ordered_json t;
        t["policy_checkpoint"] = cfg.transfer.policy_checkpoint;
        t["buffer_path"] = cfg.transfer.buffer_path;
        j["transfer"] = std::move(t);
    }
    if (!cfg.model_based.model_checkpoint.empty() ||
        !cfg.model_based.policy_checkpoint.empty()) {
        ordered_json m;
        m["model_checkpoint"] = cfg.model_based.model_checkpoint;
        m["policy_checkpoint"] = cfg.model_based.policy_checkpoint;
        j["model_based"] = std::move(m);
    }
    return j;
}

}  // namespace dynaopt
