#pragma once

#include <vector>

#include "dynaopt/env.hpp"
#include "dynaopt/nn.hpp"
#include "dynaopt/param_space.hpp"
#include "dynaopt/reward.hpp"
#include "dynaopt/rng.hpp"

namespace dynaopt {

// Product policy pi(a|z) = prod_i pi_i(a_i|z_i): one small net per
// parameter mapping a scalar noise input to G_i logits (LogSoftmax output).
struct PolicyGenerator {
    std::vector<Mlp> heads;
    std::vector<int> grid_sizes;

    std::size_t size() const { return heads.size(); }  // T
};

struct NoiseVector {
    std::vector<double> z;
};

struct PolicyUpdateConfig {
    double learning_rate = 1e-3;
    double entropy_coeff = 0.01;  // beta
    double baseline_decay = 0.99;
    OptimizerKind optimizer = OptimizerKind::Adam;
    int hidden_size = 32;
    // Whether the entropy bonus also applies during model-based steps.
    bool entropy_in_model_loop = true;
    // Keep a second baseline for the model loop instead of sharing one.
    bool separate_model_baseline = false;
};

// Exponential moving average of observed rewards; the first observation
// initializes the value directly.
struct Baseline {
    double value = 0.0;
    double decay = 0.99;
    bool initialized = false;

    double advantage(double reward) const { return initialized ? reward - value : 0.0; }
    void observe(double reward) {
        value = initialized ? decay * value + (1.0 - decay) * reward : reward;
        initialized = true;
    }
};

// Heads are 1 -> hidden_size (Tanh) -> G_i (LogSoftmax), seeded from rng.
PolicyGenerator make_policy(const ParameterSpace& space, int hidden_size, Rng& rng);

NoiseVector sample_noise(std::size_t t, Rng& rng);

struct SampledAction {
    ActionVector action;
    double log_prob = 0.0;
};

// Draws a_i ~ Categorical(exp(head_i(z_i))) by CDF walk on one uniform draw
// per head.
SampledAction sample(const PolicyGenerator& policy, const NoiseVector& z, Rng& rng);

double log_prob(const PolicyGenerator& policy, const NoiseVector& z, const ActionVector& a);
// Sum over heads of H(pi_i(.|z_i)).
double entropy(const PolicyGenerator& policy, const NoiseVector& z);

struct PolicyOptimizer {
    std::vector<OptimizerState> heads;
};

PolicyOptimizer make_policy_optimizer(const PolicyGenerator& policy,
                                      const PolicyUpdateConfig& cfg);

// One REINFORCE step on loss -[(R - b) log pi(a|z) + beta H(pi(.|z))] with
// the baseline's current value; the baseline observes R afterwards.
// Non-finite rewards are rejected (no mutation). entropy_coeff overrides
// cfg.entropy_coeff when >= 0 (the model loop passes 0 when configured so).
void reinforce_update(PolicyGenerator& policy, const NoiseVector& z, const ActionVector& a,
                      double reward, Baseline& baseline, const PolicyUpdateConfig& cfg,
                      PolicyOptimizer& opt, double entropy_coeff_override = -1.0);

// Draws n fresh (z, a) pairs, scores each through the evaluator (failures
// take the worst reward), and returns all n rewards in draw order.
std::vector<RewardValue> evaluate_policy(const PolicyGenerator& policy, Evaluator& env,
                                         const std::vector<ConstraintSpec>& constraints,
                                         int n, Rng& rng);

double success_rate(const std::vector<RewardValue>& rewards);
double mean_total(const std::vector<RewardValue>& rewards);

// Checkpoint: all T heads plus baseline state.
ordered_json policy_to_json(const PolicyGenerator& policy, const Baseline& baseline);
void policy_from_json(const ordered_json& j, PolicyGenerator& policy, Baseline& baseline);

}  // namespace dynaopt
