#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dynaopt/buffer.hpp"
#include "dynaopt/env.hpp"
#include "dynaopt/policy.hpp"
#include "dynaopt/reward_model.hpp"
#include "dynaopt/rng.hpp"

namespace dynaopt {

enum class TrainerMode { ModelFree, ModelBased, Dyna, Transfer };

std::string trainer_mode_name(TrainerMode m);
TrainerMode trainer_mode_from_name(const std::string& name);

struct TrainerConfig {
    TrainerMode mode = TrainerMode::ModelFree;
    long total_steps = 20000;  // ModelFree budget
    int cycles = 5;            // Dyna outer loops
    int n_direct = 100;        // real-evaluation steps per cycle (and transfer relabels)
    int n_model = 3000;        // surrogate steps per cycle / per model-based stage
    int eval_samples = 200;
    std::optional<double> early_stop_epsilon;  // off unless set
    long buffer_window = 0;                    // regression window, 0 = whole buffer
    PolicyUpdateConfig policy;
    RegressionConfig regression;
    HeadMode head_mode = HeadMode::Scalar;
};

void validate_trainer_config(const TrainerConfig& cfg);

// Named random streams derived from one master seed, so the modes stay
// comparable under matched seeds and consumption in one stream never shifts
// another.
struct SeedStreams {
    Rng policy_init;
    Rng model_init;
    Rng noise;
    Rng sampling;
    Rng regression;
    Rng eval;

    explicit SeedStreams(std::uint64_t master)
        : policy_init(Rng(master).stream("policy_init")),
          model_init(Rng(master).stream("model_init")),
          noise(Rng(master).stream("noise")),
          sampling(Rng(master).stream("sampling")),
          regression(Rng(master).stream("regression")),
          eval(Rng(master).stream("eval")) {}
};

enum class LoopKind { Real, Model };

struct StepRecord {
    long step = 0;
    Phase phase = Phase::Schematic;
    LoopKind loop = LoopKind::Real;
    double reward = 0.0;  // the R fed to REINFORCE (predicted one on model steps)
    double baseline = 0.0;
    double entropy = 0.0;
    std::optional<double> predicted;  // set on model steps only
};

struct CycleRecord {
    int cycle = 0;
    std::size_t buffer_size = 0;
    FitReport fit;
    double real_mean_reward = 0.0;   // over this cycle's real samples
    double real_success_rate = 0.0;
};

struct RunLog {
    std::vector<StepRecord> steps;
    std::vector<CycleRecord> cycles;
    std::optional<long> early_stop_step;
    long real_evals = 0;  // training evaluations on the real env
};

// Single CSV with a kind column; step and cycle rows fill disjoint fields.
void write_runlog_csv(const RunLog& log, const std::filesystem::path& path);
RunLog read_runlog_csv(const std::filesystem::path& path);

// Everything one training mode needs; the caller owns all pieces.
struct TrainContext {
    PolicyGenerator& policy;
    PolicyOptimizer& optimizer;
    Baseline& baseline;
    Evaluator& env;
    const ParameterSpace& space;
    const std::vector<ConstraintSpec>& constraints;
    Phase phase = Phase::Schematic;
    SampleBuffer& buffer;
    SeedStreams& streams;
    long step = 0;  // global step counter across stages
    Baseline model_baseline;  // used when policy.separate_model_baseline
};

// Evaluate + score with the failure policy: nullopt metrics (or a scoring
// EvalError) become a failed sample with the worst reward.
Sample evaluate_and_score(Evaluator& env, const std::vector<ConstraintSpec>& constraints,
                          const ActionVector& a, Phase phase, long step);

using PredictFn = std::function<RewardValue(const ActionVector&)>;

// total_steps of: sample (z, a), real evaluation, constraint score, REINFORCE
// update, buffer append. Optional early stop on the trailing-500 mean.
RunLog run_model_free(const TrainerConfig& cfg, TrainContext& ctx);

// Algorithm: per cycle, n_direct real steps, one regression on the buffer,
// n_model surrogate steps (no env calls, no buffer appends). Exactly
// cycles * n_direct real evaluations.
RunLog run_dyna(const TrainerConfig& cfg, TrainContext& ctx, RewardModel& model);

// n_model REINFORCE steps against `predict` only; acts on ctx.policy and
// appends to `log`. Never touches the env or the buffer.
void run_model_based_steps(const TrainerConfig& cfg, TrainContext& ctx, const PredictFn& predict,
                           long n_steps, RunLog& log);

// Standalone model-based mode.
RunLog run_model_based(const TrainerConfig& cfg, TrainContext& ctx, const PredictFn& predict);

// Transfer: (1) fit `model` on the preloaded (schematic) buffer; (2) draw
// n_direct actions from the pretrained policy, evaluate on ctx.env (the
// post-layout env), append as PostLayout samples, fine-tune via
// warm_start + fit on them; (3) n_model model-based steps, zero env calls.
RunLog run_transfer(const TrainerConfig& cfg, TrainContext& ctx, RewardModel& model);

}  // namespace dynaopt
