#include "dynaopt/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "dynaopt/buffer.hpp"
#include "dynaopt/errors.hpp"
#include "dynaopt/external_sim.hpp"
#include "dynaopt/policy.hpp"
#include "dynaopt/reward_model.hpp"

namespace dynaopt {

namespace {

void require_policy_matches_space(const PolicyGenerator& policy, const ParameterSpace& space) {
    bool ok = policy.size() == space.size();
    for (std::size_t i = 0; ok && i < space.size(); ++i) {
        ok = policy.grid_sizes[i] == space.grid_size(i);
    }
    if (!ok) throw ConfigError("policy checkpoint is incompatible with the configured space");
}

std::vector<std::string> constraint_metric_names(const std::vector<ConstraintSpec>& constraints) {
    std::vector<std::string> names;
    names.reserve(constraints.size());
    for (const ConstraintSpec& c : constraints) names.push_back(c.metric);
    return names;
}

std::unique_ptr<Evaluator> build_env(const ExperimentConfig& cfg,
                                     const std::filesystem::path& out_dir) {
    switch (cfg.env_kind) {
        case EnvKind::Schematic:
            return make_env(Phase::Schematic, cfg.model, cfg.space);
        case EnvKind::PostLayout:
            return make_env(Phase::PostLayout, cfg.model, cfg.space);
        case EnvKind::External: {
            ExternalSimConfig ext = cfg.external;
            ext.work_dir = out_dir / "external_calls";
            return std::make_unique<ExternalEvaluator>(std::move(ext), cfg.space,
                                                       constraint_metric_names(cfg.constraints));
        }
    }
    throw ConfigError("unknown env kind");
}

void refuse_clobber(const std::vector<std::filesystem::path>& files, bool overwrite) {
    if (overwrite) return;
    for (const std::filesystem::path& f : files) {
        if (std::filesystem::exists(f)) {
            throw ConfigError("output exists: " + f.string() + " (pass --overwrite to replace)");
        }
    }
}

std::vector<double> totals_of(const std::vector<RewardValue>& rewards) {
    std::vector<double> totals;
    totals.reserve(rewards.size());
    for (const RewardValue& r : rewards) totals.push_back(r.total);
    return totals;
}

void write_rewards_csv(const std::vector<double>& totals, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw EvalError("cannot write " + path.string());
    out << "reward\n";
    for (double r : totals) out << format_double(r) << '\n';
}

}  // namespace

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& overrides) {
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.mode) cfg.trainer.mode = trainer_mode_from_name(*overrides.mode);
    if (overrides.out) cfg.output_dir = *overrides.out;
    if (overrides.eval_samples) cfg.trainer.eval_samples = *overrides.eval_samples;
    validate_trainer_config(cfg.trainer);
    if (cfg.trainer.mode == TrainerMode::Transfer &&
        (cfg.transfer.policy_checkpoint.empty() || cfg.transfer.buffer_path.empty())) {
        throw ConfigError("transfer mode needs transfer.policy_checkpoint and transfer.buffer_path");
    }
    if (cfg.trainer.mode == TrainerMode::ModelBased &&
        cfg.model_based.model_checkpoint.empty()) {
        throw ConfigError("model_based mode needs model_based.model_checkpoint");
    }
}

HistogramExport make_histogram(const std::vector<double>& rewards, int bins, double lo,
                               double hi) {
    if (bins < 1 || !(lo < hi)) throw ConfigError("histogram needs bins >= 1 and lo < hi");
    HistogramExport h;
    h.bin_edges.reserve(static_cast<std::size_t>(bins) + 1);
    const double width = (hi - lo) / bins;
    for (int i = 0; i < bins; ++i) h.bin_edges.push_back(lo + width * i);
    h.bin_edges.push_back(hi);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    long successes = 0;
    for (double r : rewards) {
        int idx = static_cast<int>(std::floor((r - lo) / width));
        idx = std::max(0, std::min(bins - 1, idx));
        h.counts[static_cast<std::size_t>(idx)] += 1;
        h.n += 1;
        if (r == 0.0) ++successes;
    }
    h.success_rate = h.n > 0 ? static_cast<double>(successes) / static_cast<double>(h.n) : 0.0;
    return h;
}

void write_histogram_csv(const HistogramExport& h, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw EvalError("cannot write " + path.string());
    out << "# n=" << h.n << " success_rate=" << format_double(h.success_rate) << '\n';
    out << "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out << format_double(h.bin_edges[i]) << ',' << format_double(h.bin_edges[i + 1]) << ','
            << h.counts[i] << '\n';
    }
}

ordered_json run_summary_to_json(const RunSummary& s) {
    ordered_json j;
    j["mode"] = s.mode;
    j["seed"] = s.seed;
    j["real_evals"] = s.real_evals;
    j["eval_samples"] = s.eval_samples;
    j["final_mean_reward"] = s.final_mean_reward;
    j["final_success_rate"] = s.final_success_rate;
    j["buffer_size"] = s.buffer_size;
    if (s.early_stop_step) j["early_stop_step"] = *s.early_stop_step;
    return j;
}

RunSummary run_experiment(const ExperimentConfig& cfg, bool overwrite) {
    const std::filesystem::path out_dir = cfg.output_dir;
    const auto config_path = out_dir / "config.json";
    const auto runlog_path = out_dir / "runlog.csv";
    const auto buffer_path = out_dir / "buffer.jsonl";
    const auto policy_path = out_dir / "policy.json";
    const auto model_path = out_dir / "reward_model.json";
    const auto summary_path = out_dir / "summary.json";
    refuse_clobber({config_path, runlog_path, buffer_path, policy_path, model_path, summary_path},
                   overwrite);
    std::filesystem::create_directories(out_dir);

    const TrainerMode mode = cfg.trainer.mode;
    const Phase phase = (mode == TrainerMode::Transfer || cfg.env_kind == EnvKind::PostLayout)
                            ? Phase::PostLayout
                            : Phase::Schematic;
    SeedStreams streams(cfg.seed);
    std::unique_ptr<Evaluator> env = build_env(cfg, out_dir);

    PolicyGenerator policy;
    Baseline baseline;
    baseline.decay = cfg.trainer.policy.baseline_decay;
    if (mode == TrainerMode::Transfer) {
        policy_from_json(load_json_file(cfg.transfer.policy_checkpoint), policy, baseline);
        require_policy_matches_space(policy, cfg.space);
    } else if (mode == TrainerMode::ModelBased && !cfg.model_based.policy_checkpoint.empty()) {
        policy_from_json(load_json_file(cfg.model_based.policy_checkpoint), policy, baseline);
        require_policy_matches_space(policy, cfg.space);
    } else {
        policy = make_policy(cfg.space, cfg.trainer.policy.hidden_size, streams.policy_init);
    }
    PolicyOptimizer optimizer = make_policy_optimizer(policy, cfg.trainer.policy);

    SampleBuffer buffer;
    if (mode == TrainerMode::Transfer) buffer = load_buffer(cfg.transfer.buffer_path);

    std::optional<RewardModel> model;
    if (mode == TrainerMode::Dyna || mode == TrainerMode::Transfer) {
        model.emplace(make_reward_model(cfg.space, cfg.constraints, cfg.trainer.head_mode,
                                        streams.model_init));
    } else if (mode == TrainerMode::ModelBased) {
        model.emplace(reward_model_from_json(load_json_file(cfg.model_based.model_checkpoint)));
        if (static_cast<std::size_t>(model->net().input_size()) != cfg.space.size()) {
            throw ConfigError("reward model checkpoint is incompatible with the configured space");
        }
    }

    TrainContext ctx{policy, optimizer,       baseline, *env,    cfg.space,
                     cfg.constraints, phase,  buffer,   streams, 0,
                     Baseline{}};
    ctx.model_baseline.decay = cfg.trainer.policy.baseline_decay;

    RunLog log;
    switch (mode) {
        case TrainerMode::ModelFree:
            log = run_model_free(cfg.trainer, ctx);
            break;
        case TrainerMode::Dyna:
            log = run_dyna(cfg.trainer, ctx, *model);
            break;
        case TrainerMode::ModelBased: {
            const PredictFn predict = [&](const ActionVector& a) {
                return model->predict(a, cfg.space);
            };
            log = run_model_based(cfg.trainer, ctx, predict);
            break;
        }
        case TrainerMode::Transfer:
            log = run_transfer(cfg.trainer, ctx, *model);
            break;
    }

    const std::vector<RewardValue> rewards =
        evaluate_policy(policy, *env, cfg.constraints, cfg.trainer.eval_samples, streams.eval);

    RunSummary summary;
    summary.mode = trainer_mode_name(mode);
    summary.seed = cfg.seed;
    summary.real_evals = log.real_evals;
    summary.eval_samples = cfg.trainer.eval_samples;
    summary.final_mean_reward = mean_total(rewards);
    summary.final_success_rate = success_rate(rewards);
    summary.buffer_size = buffer.size();
    summary.early_stop_step = log.early_stop_step;

    save_json_file(experiment_config_to_json(cfg), config_path);
    write_runlog_csv(log, runlog_path);
    save_buffer(buffer, buffer_path);
    save_json_file(policy_to_json(policy, baseline), policy_path);
    if (model) save_json_file(reward_model_to_json(*model), model_path);
    save_json_file(run_summary_to_json(summary), summary_path);
    return summary;
}

int cmd_run(const std::filesystem::path& config_path, const CliOverrides& overrides) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    apply_overrides(cfg, overrides);
    const RunSummary s = run_experiment(cfg, overrides.overwrite);
    std::cout << "run: mode=" << s.mode << " seed=" << s.seed << " real_evals=" << s.real_evals
              << " eval_mean=" << format_double(s.final_mean_reward)
              << " eval_success=" << format_double(s.final_success_rate) << " -> "
              << cfg.output_dir << "\n";
    return 0;
}

int cmd_eval(const std::filesystem::path& policy_path, const std::filesystem::path& config_path,
             const CliOverrides& overrides) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    apply_overrides(cfg, overrides);

    PolicyGenerator policy;
    Baseline baseline;
    policy_from_json(load_json_file(policy_path), policy, baseline);
    require_policy_matches_space(policy, cfg.space);

    const std::filesystem::path out_dir = cfg.output_dir;
    const auto histogram_path = out_dir / "histogram.csv";
    const auto rewards_path = out_dir / "rewards.csv";
    const auto summary_path = out_dir / "eval_summary.json";
    refuse_clobber({histogram_path, rewards_path, summary_path}, overrides.overwrite);
    std::filesystem::create_directories(out_dir);

    std::unique_ptr<Evaluator> env = build_env(cfg, out_dir);
    SeedStreams streams(cfg.seed);
    const int n = cfg.trainer.eval_samples;
    const std::vector<double> totals =
        totals_of(evaluate_policy(policy, *env, cfg.constraints, n, streams.eval));

    const HistogramExport h = make_histogram(totals, 40, worst_reward(cfg.constraints), 0.0);
    write_histogram_csv(h, histogram_path);
    write_rewards_csv(totals, rewards_path);
    ordered_json j;
    j["n"] = h.n;
    double mean = 0.0;
    for (double r : totals) mean += r;
    if (!totals.empty()) mean /= static_cast<double>(totals.size());
    j["mean_reward"] = mean;
    j["success_rate"] = h.success_rate;
    save_json_file(j, summary_path);
    std::cout << "eval: n=" << h.n << " mean=" << format_double(mean)
              << " success=" << format_double(h.success_rate) << " -> " << out_dir.string()
              << "\n";
    return 0;
}

int cmd_export(const std::filesystem::path& runlog_path, const std::string& what,
               const CliOverrides& overrides) {
    const RunLog log = read_runlog_csv(runlog_path);
    std::vector<double> real_rewards;
    std::vector<long> real_steps;
    for (const StepRecord& s : log.steps) {
        if (s.loop == LoopKind::Real) {
            real_rewards.push_back(s.reward);
            real_steps.push_back(s.step);
        }
    }
    const std::filesystem::path base =
        runlog_path.has_parent_path() ? runlog_path.parent_path() : ".";

    if (what == "mean-reward-curve") {
        const std::filesystem::path out =
            overrides.out ? std::filesystem::path(*overrides.out)
                          : base / "mean_reward_curve.csv";
        refuse_clobber({out}, overrides.overwrite);
        std::ofstream f(out);
        if (!f) throw EvalError("cannot write " + out.string());
        f << "step,mean_reward\n";
        constexpr std::size_t window = 100;
        double rolling = 0.0;
        for (std::size_t i = 0; i < real_rewards.size(); ++i) {
            rolling += real_rewards[i];
            if (i + 1 < window) continue;
            if (i >= window) rolling -= real_rewards[i - window];
            f << real_steps[i] << ',' << format_double(rolling / window) << '\n';
        }
        std::cout << "export: mean-reward-curve -> " << out.string() << "\n";
        return 0;
    }
    if (what == "histogram") {
        const std::filesystem::path out = overrides.out ? std::filesystem::path(*overrides.out)
                                                        : base / "reward_histogram.csv";
        refuse_clobber({out}, overrides.overwrite);
        write_histogram_csv(make_histogram(real_rewards, 40, -4.0, 0.0), out);
        std::cout << "export: histogram -> " << out.string() << "\n";
        return 0;
    }
    throw ConfigError("unknown export kind: " + what + " (mean-reward-curve | histogram)");
}

}  // namespace dynaopt
