#include "dynaopt/trainer.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "dynaopt/errors.hpp"
#include "dynaopt/json_io.hpp"

namespace dynaopt {

namespace {

constexpr long kEarlyStopWindow = 500;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// CSV cell for a double; NaN (unset) becomes an empty field.
std::string csv_num(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

double parse_csv_num(const std::string& cell) {
    return cell.empty() ? nan_value() : std::stod(cell);
}

struct RealStepOutcome {
    double reward = 0.0;
};

// One model-free step: draw, evaluate for real, score, update, append, log.
RealStepOutcome real_step(const TrainerConfig& cfg, TrainContext& ctx, RunLog& log) {
    const NoiseVector z = sample_noise(ctx.policy.size(), ctx.streams.noise);
    const SampledAction sa = sample(ctx.policy, z, ctx.streams.sampling);
    const Sample s = evaluate_and_score(ctx.env, ctx.constraints, sa.action, ctx.phase,
                                        ++ctx.step);
    const double ent = entropy(ctx.policy, z);
    reinforce_update(ctx.policy, z, sa.action, s.reward.total, ctx.baseline, cfg.policy,
                     ctx.optimizer);
    const double reward = s.reward.total;
    ctx.buffer.append(s);
    log.real_evals += 1;
    log.steps.push_back({ctx.step, ctx.phase, LoopKind::Real, reward, ctx.baseline.value, ent,
                         std::nullopt});
    return {reward};
}

// One surrogate step: draw, predict, update. No env, no buffer.
void model_step(const TrainerConfig& cfg, TrainContext& ctx, const PredictFn& predict,
                RunLog& log) {
    const NoiseVector z = sample_noise(ctx.policy.size(), ctx.streams.noise);
    const SampledAction sa = sample(ctx.policy, z, ctx.streams.sampling);
    const RewardValue pred = predict(sa.action);
    const double ent = entropy(ctx.policy, z);
    Baseline& baseline =
        cfg.policy.separate_model_baseline ? ctx.model_baseline : ctx.baseline;
    const double beta_override = cfg.policy.entropy_in_model_loop ? -1.0 : 0.0;
    reinforce_update(ctx.policy, z, sa.action, pred.total, baseline, cfg.policy, ctx.optimizer,
                     beta_override);
    log.steps.push_back({++ctx.step, ctx.phase, LoopKind::Model, pred.total, baseline.value,
                         ent, pred.total});
}

struct CycleStats {
    double sum = 0.0;
    long n = 0;
    long successes = 0;

    void add(double reward) {
        sum += reward;
        n += 1;
        if (reward == 0.0) successes += 1;
    }
    double mean() const { return n > 0 ? sum / static_cast<double>(n) : nan_value(); }
    double success() const {
        return n > 0 ? static_cast<double>(successes) / static_cast<double>(n) : nan_value();
    }
};

}  // namespace

std::string trainer_mode_name(TrainerMode m) {
    switch (m) {
        case TrainerMode::ModelFree: return "model_free";
        case TrainerMode::ModelBased: return "model_based";
        case TrainerMode::Dyna: return "dyna";
        case TrainerMode::Transfer: return "transfer";
    }
    return "model_free";
}

TrainerMode trainer_mode_from_name(const std::string& name) {
    if (name == "model_free") return TrainerMode::ModelFree;
    if (name == "model_based") return TrainerMode::ModelBased;
    if (name == "dyna") return TrainerMode::Dyna;
    if (name == "transfer") return TrainerMode::Transfer;
    throw ConfigError("unknown trainer mode: " + name);
}

void validate_trainer_config(const TrainerConfig& cfg) {
    if (cfg.total_steps < 0 || cfg.cycles < 0 || cfg.n_direct < 0 || cfg.n_model < 0) {
        throw ConfigError("trainer: counts must be >= 0");
    }
    if (cfg.eval_samples < 1) throw ConfigError("trainer: eval_samples must be >= 1");
    if (cfg.mode == TrainerMode::ModelFree && cfg.total_steps < 1) {
        throw ConfigError("trainer: model_free needs total_steps >= 1");
    }
    if (cfg.mode == TrainerMode::Dyna && (cfg.cycles < 1 || cfg.n_direct < 1)) {
        throw ConfigError("trainer: dyna needs cycles >= 1 and n_direct >= 1");
    }
    if (cfg.early_stop_epsilon && !(*cfg.early_stop_epsilon >= 0.0)) {
        throw ConfigError("trainer: early_stop_epsilon must be >= 0");
    }
    if (!(cfg.policy.learning_rate > 0.0)) throw ConfigError("policy: learning_rate must be positive");
    if (cfg.policy.entropy_coeff < 0.0) throw ConfigError("policy: entropy_coeff must be >= 0");
    if (!(cfg.policy.baseline_decay > 0.0 && cfg.policy.baseline_decay < 1.0)) {
        throw ConfigError("policy: baseline_decay must be in (0, 1)");
    }
    if (cfg.policy.hidden_size < 1) throw ConfigError("policy: hidden_size must be >= 1");
    if (cfg.regression.epochs < 1 || cfg.regression.batch_size < 1) {
        throw ConfigError("regression: epochs and batch_size must be positive");
    }
    if (!(cfg.regression.learning_rate > 0.0)) {
        throw ConfigError("regression: learning_rate must be positive");
    }
    if (cfg.regression.holdout_fraction < 0.0 || cfg.regression.holdout_fraction > 0.5) {
        throw ConfigError("regression: holdout_fraction must be in [0, 0.5]");
    }
    if (cfg.buffer_window < 0) throw ConfigError("trainer: buffer_window must be >= 0");
}

Sample evaluate_and_score(Evaluator& env, const std::vector<ConstraintSpec>& constraints,
                          const ActionVector& a, Phase phase, long step) {
    Sample s;
    s.action = a;
    s.phase = phase;
    s.step = step;
    const std::optional<MetricVector> metrics = env.evaluate(a);
    if (metrics) {
        try {
            s.metrics = *metrics;
            s.reward = score(constraints, *metrics);
            return s;
        } catch (const EvalError&) {
            // bad measurement (negative/NaN) -> failure sample
            s.metrics.clear();
        }
    }
    s.failed = true;
    s.reward = RewardValue{};
    s.reward.total = worst_reward(constraints);
    return s;
}

RunLog run_model_free(const TrainerConfig& cfg, TrainContext& ctx) {
    if (cfg.total_steps < 1) throw ConfigError("run_model_free: total_steps must be >= 1");
    RunLog log;
    std::deque<double> window;
    double window_sum = 0.0;
    for (long i = 0; i < cfg.total_steps; ++i) {
        const RealStepOutcome out = real_step(cfg, ctx, log);
        if (!cfg.early_stop_epsilon) continue;
        window.push_back(out.reward);
        window_sum += out.reward;
        if (static_cast<long>(window.size()) > kEarlyStopWindow) {
            window_sum -= window.front();
            window.pop_front();
        }
        if (static_cast<long>(window.size()) == kEarlyStopWindow &&
            window_sum / static_cast<double>(kEarlyStopWindow) >= -*cfg.early_stop_epsilon) {
            log.early_stop_step = ctx.step;
            break;
        }
    }
    return log;
}

RunLog run_dyna(const TrainerConfig& cfg, TrainContext& ctx, RewardModel& model) {
    if (cfg.cycles < 1 || cfg.n_direct < 1) {
        throw ConfigError("run_dyna: cycles and n_direct must be >= 1");
    }
    RunLog log;
    for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
        CycleStats stats;
        for (int i = 0; i < cfg.n_direct; ++i) {
            stats.add(real_step(cfg, ctx, log).reward);
        }
        CycleRecord record;
        record.cycle = cycle;
        record.buffer_size = ctx.buffer.size();
        record.real_mean_reward = stats.mean();
        record.real_success_rate = stats.success();
        bool fitted = false;
        try {
            record.fit = model.fit(ctx.buffer.tail(cfg.buffer_window), ctx.space,
                                   cfg.regression, ctx.streams.regression);
            fitted = true;
        } catch (const EvalError& e) {
            std::cerr << "dyna cycle " << cycle << ": regression skipped: " << e.what() << "\n";
            record.fit = FitReport{};
            record.fit.train_mse = nan_value();
            record.fit.holdout_mse = nan_value();
        }
        log.cycles.push_back(record);
        if (!fitted) continue;
        const PredictFn predict = [&](const ActionVector& a) {
            return model.predict(a, ctx.space);
        };
        for (int i = 0; i < cfg.n_model; ++i) model_step(cfg, ctx, predict, log);
    }
    return log;
}

void run_model_based_steps(const TrainerConfig& cfg, TrainContext& ctx, const PredictFn& predict,
                           long n_steps, RunLog& log) {
    for (long i = 0; i < n_steps; ++i) model_step(cfg, ctx, predict, log);
}

RunLog run_model_based(const TrainerConfig& cfg, TrainContext& ctx, const PredictFn& predict) {
    RunLog log;
    run_model_based_steps(cfg, ctx, predict, cfg.n_model, log);
    return log;
}

RunLog run_transfer(const TrainerConfig& cfg, TrainContext& ctx, RewardModel& model) {
    if (ctx.buffer.empty()) {
        throw ConfigError("run_transfer: needs a non-empty pretraining buffer");
    }
    RunLog log;

    // Stage 1: surrogate from the reused (schematic) samples.
    CycleRecord pretrain;
    pretrain.cycle = 0;
    pretrain.buffer_size = ctx.buffer.size();
    pretrain.fit = model.fit(ctx.buffer.tail(cfg.buffer_window), ctx.space, cfg.regression,
                             ctx.streams.regression);
    pretrain.real_mean_reward = nan_value();
    pretrain.real_success_rate = nan_value();
    log.cycles.push_back(pretrain);

    // Stage 2: n_direct real post-layout evaluations from the frozen policy.
    std::vector<NoiseVector> zs;
    std::vector<ActionVector> actions;
    zs.reserve(static_cast<std::size_t>(cfg.n_direct));
    actions.reserve(static_cast<std::size_t>(cfg.n_direct));
    for (int i = 0; i < cfg.n_direct; ++i) {
        zs.push_back(sample_noise(ctx.policy.size(), ctx.streams.noise));
        actions.push_back(sample(ctx.policy, zs.back(), ctx.streams.sampling).action);
    }
    const auto all_metrics = ctx.env.evaluate_batch(actions);
    CycleStats stats;
    std::vector<Sample> fresh;
    fresh.reserve(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        Sample s;
        s.action = actions[i];
        s.phase = ctx.phase;
        s.step = ++ctx.step;
        if (all_metrics[i]) {
            try {
                s.metrics = *all_metrics[i];
                s.reward = score(ctx.constraints, *all_metrics[i]);
            } catch (const EvalError&) {
                s.metrics.clear();
                s.failed = true;
            }
        } else {
            s.failed = true;
        }
        if (s.failed) {
            s.reward = RewardValue{};
            s.reward.total = worst_reward(ctx.constraints);
        }
        stats.add(s.reward.total);
        ctx.buffer.append(s);
        fresh.push_back(s);
        log.real_evals += 1;
        log.steps.push_back({s.step, ctx.phase, LoopKind::Real, s.reward.total,
                             ctx.baseline.value, entropy(ctx.policy, zs[i]), std::nullopt});
    }

    // Fine-tune: warm start a fresh model from the schematic one, then fit
    // on the relabeled samples only.
    RewardModel finetuned = make_reward_model(ctx.space, ctx.constraints, cfg.head_mode,
                                              ctx.streams.model_init);
    finetuned.warm_start(model);
    CycleRecord finetune;
    finetune.cycle = 1;
    finetune.buffer_size = ctx.buffer.size();
    finetune.fit = finetuned.fit(fresh, ctx.space, cfg.regression, ctx.streams.regression);
    finetune.real_mean_reward = stats.mean();
    finetune.real_success_rate = stats.success();
    log.cycles.push_back(finetune);
    model = std::move(finetuned);

    // Stage 3: model-based refinement only; zero env calls by construction.
    const PredictFn predict = [&](const ActionVector& a) { return model.predict(a, ctx.space); };
    run_model_based_steps(cfg, ctx, predict, cfg.n_model, log);
    return log;
}

void write_runlog_csv(const RunLog& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw EvalError("cannot write runlog " + path.string());
    out << "kind,step,phase,loop,reward,baseline,entropy,predicted,cycle,buffer_size,"
           "fit_used,fit_excluded,fit_train_count,fit_holdout_count,fit_train_mse,"
           "fit_holdout_mse,real_mean_reward,real_success_rate\n";
    for (const StepRecord& s : log.steps) {
        out << "step," << s.step << ',' << phase_name(s.phase) << ','
            << (s.loop == LoopKind::Real ? "real" : "model") << ',' << csv_num(s.reward) << ','
            << csv_num(s.baseline) << ',' << csv_num(s.entropy) << ','
            << (s.predicted ? csv_num(*s.predicted) : std::string()) << ",,,,,,,,,,\n";
    }
    for (const CycleRecord& c : log.cycles) {
        out << "cycle,,,,,,,," << c.cycle << ',' << c.buffer_size << ',' << c.fit.used << ','
            << c.fit.excluded_failures << ',' << c.fit.train_count << ',' << c.fit.holdout_count
            << ',' << csv_num(c.fit.train_mse) << ',' << csv_num(c.fit.holdout_mse) << ','
            << csv_num(c.real_mean_reward) << ',' << csv_num(c.real_success_rate) << '\n';
    }
    if (!out) throw EvalError("write failed for runlog " + path.string());
}

RunLog read_runlog_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot open runlog " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw EvalError("runlog is empty: " + path.string());
    RunLog log;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        cells.resize(18);
        try {
            if (cells[0] == "step") {
                StepRecord s;
                s.step = std::stol(cells[1]);
                s.phase = phase_from_name(cells[2]);
                s.loop = cells[3] == "real" ? LoopKind::Real : LoopKind::Model;
                s.reward = parse_csv_num(cells[4]);
                s.baseline = parse_csv_num(cells[5]);
                s.entropy = parse_csv_num(cells[6]);
                if (!cells[7].empty()) s.predicted = parse_csv_num(cells[7]);
                if (s.loop == LoopKind::Real) log.real_evals += 1;
                log.steps.push_back(std::move(s));
            } else if (cells[0] == "cycle") {
                CycleRecord c;
                c.cycle = std::stoi(cells[8]);
                c.buffer_size = static_cast<std::size_t>(std::stol(cells[9]));
                c.fit.used = std::stoi(cells[10]);
                c.fit.excluded_failures = std::stoi(cells[11]);
                c.fit.train_count = std::stoi(cells[12]);
                c.fit.holdout_count = std::stoi(cells[13]);
                c.fit.train_mse = parse_csv_num(cells[14]);
                c.fit.holdout_mse = parse_csv_num(cells[15]);
                c.real_mean_reward = parse_csv_num(cells[16]);
                c.real_success_rate = parse_csv_num(cells[17]);
                log.cycles.push_back(std::move(c));
            } else {
                throw EvalError("unknown row kind");
            }
        } catch (const std::exception&) {
            throw EvalError("runlog parse error at line " + std::to_string(line_no) + " of " +
                            path.string());
        }
    }
    return log;
}

}  // namespace dynaopt
