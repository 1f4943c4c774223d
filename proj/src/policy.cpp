#include "dynaopt/policy.hpp"

#include <cmath>

#include "dynaopt/errors.hpp"

namespace dynaopt {

PolicyGenerator make_policy(const ParameterSpace& space, int hidden_size, Rng& rng) {
    if (hidden_size < 1) throw ConfigError("policy: hidden_size must be positive");
    PolicyGenerator policy;
    policy.heads.reserve(space.size());
    policy.grid_sizes.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        policy.heads.emplace_back(std::vector<int>{1, hidden_size, space.grid_size(i)},
                                  Activation::Tanh, Activation::LogSoftmax, rng);
        policy.grid_sizes.push_back(space.grid_size(i));
    }
    return policy;
}

NoiseVector sample_noise(std::size_t t, Rng& rng) {
    NoiseVector z;
    z.z.resize(t);
    for (double& v : z.z) v = rng.normal();
    return z;
}

SampledAction sample(const PolicyGenerator& policy, const NoiseVector& z, Rng& rng) {
    if (z.z.size() != policy.size()) throw EvalError("policy sample: noise length mismatch");
    SampledAction out;
    out.action.indices.resize(policy.size());
    for (std::size_t i = 0; i < policy.size(); ++i) {
        const std::vector<double> logp = policy.heads[i].forward(std::span(&z.z[i], 1));
        const double u = rng.uniform01();
        // CDF walk over probabilities; the tail catch-all absorbs rounding.
        double cum = 0.0;
        int pick = static_cast<int>(logp.size()) - 1;
        for (std::size_t g = 0; g < logp.size(); ++g) {
            cum += std::exp(logp[g]);
            if (u < cum) {
                pick = static_cast<int>(g);
                break;
            }
        }
        out.action.indices[i] = pick;
        out.log_prob += logp[static_cast<std::size_t>(pick)];
    }
    return out;
}

double log_prob(const PolicyGenerator& policy, const NoiseVector& z, const ActionVector& a) {
    if (z.z.size() != policy.size() || a.indices.size() != policy.size()) {
        throw EvalError("policy log_prob: length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < policy.size(); ++i) {
        const std::vector<double> logp = policy.heads[i].forward(std::span(&z.z[i], 1));
        const int g = a.indices[i];
        if (g < 0 || g >= static_cast<int>(logp.size())) {
            throw std::out_of_range("policy log_prob: action index out of range");
        }
        total += logp[static_cast<std::size_t>(g)];
    }
    return total;
}

double entropy(const PolicyGenerator& policy, const NoiseVector& z) {
    if (z.z.size() != policy.size()) throw EvalError("policy entropy: noise length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < policy.size(); ++i) {
        const std::vector<double> logp = policy.heads[i].forward(std::span(&z.z[i], 1));
        for (double lp : logp) total -= std::exp(lp) * lp;
    }
    return total;
}

PolicyOptimizer make_policy_optimizer(const PolicyGenerator& policy,
                                      const PolicyUpdateConfig& cfg) {
    PolicyOptimizer opt;
    opt.heads.reserve(policy.size());
    for (std::size_t i = 0; i < policy.size(); ++i) {
        opt.heads.push_back(make_optimizer(cfg.optimizer, cfg.learning_rate));
    }
    return opt;
}

void reinforce_update(PolicyGenerator& policy, const NoiseVector& z, const ActionVector& a,
                      double reward, Baseline& baseline, const PolicyUpdateConfig& cfg,
                      PolicyOptimizer& opt, double entropy_coeff_override) {
    if (!std::isfinite(reward)) return;  // rejected, no update
    if (z.z.size() != policy.size() || a.indices.size() != policy.size() ||
        opt.heads.size() != policy.size()) {
        throw EvalError("reinforce_update: length mismatch");
    }
    const double beta =
        entropy_coeff_override >= 0.0 ? entropy_coeff_override : cfg.entropy_coeff;
    const double advantage = baseline.advantage(reward);

    for (std::size_t i = 0; i < policy.size(); ++i) {
        const std::span<const double> zi(&z.z[i], 1);
        const std::vector<double> logp = policy.heads[i].forward(zi);
        const int g_pick = a.indices[i];
        if (g_pick < 0 || g_pick >= static_cast<int>(logp.size())) {
            throw std::out_of_range("reinforce_update: action index out of range");
        }
        // Loss L = -[(R - b) logp_a + beta H], H = -sum_g p_g logp_g.
        // dL/dlogp_g = -(R - b) [g = a]  +  beta p_g (logp_g + 1).
        std::vector<double> upstream(logp.size());
        for (std::size_t g = 0; g < logp.size(); ++g) {
            upstream[g] = beta * std::exp(logp[g]) * (logp[g] + 1.0);
        }
        upstream[static_cast<std::size_t>(g_pick)] -= advantage;
        const Gradients grads = policy.heads[i].backward(zi, upstream);
        apply_update(policy.heads[i], grads, opt.heads[i]);
    }
    baseline.observe(reward);
}

std::vector<RewardValue> evaluate_policy(const PolicyGenerator& policy, Evaluator& env,
                                         const std::vector<ConstraintSpec>& constraints,
                                         int n, Rng& rng) {
    if (n < 1) throw ConfigError("evaluate_policy: n must be >= 1");
    std::vector<ActionVector> actions;
    actions.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const NoiseVector z = sample_noise(policy.size(), rng);
        actions.push_back(sample(policy, z, rng).action);
    }
    const auto metrics = env.evaluate_batch(actions);
    std::vector<RewardValue> rewards;
    rewards.reserve(actions.size());
    const double worst = worst_reward(constraints);
    for (const auto& m : metrics) {
        if (m) {
            rewards.push_back(score(constraints, *m));
        } else {
            RewardValue r;
            r.total = worst;
            rewards.push_back(r);
        }
    }
    return rewards;
}

double success_rate(const std::vector<RewardValue>& rewards) {
    if (rewards.empty()) return 0.0;
    std::size_t hits = 0;
    for (const RewardValue& r : rewards) {
        if (r.total == 0.0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rewards.size());
}

double mean_total(const std::vector<RewardValue>& rewards) {
    if (rewards.empty()) return 0.0;
    double sum = 0.0;
    for (const RewardValue& r : rewards) sum += r.total;
    return sum / static_cast<double>(rewards.size());
}

ordered_json policy_to_json(const PolicyGenerator& policy, const Baseline& baseline) {
    ordered_json j;
    j["kind"] = "dynaopt_policy";
    j["grid_sizes"] = policy.grid_sizes;
    ordered_json heads = ordered_json::array();
    for (const Mlp& head : policy.heads) heads.push_back(mlp_to_json(head));
    j["heads"] = std::move(heads);
    j["baseline"] = {{"value", baseline.value},
                     {"decay", baseline.decay},
                     {"initialized", baseline.initialized}};
    return j;
}

void policy_from_json(const ordered_json& j, PolicyGenerator& policy, Baseline& baseline) {
    try {
        if (j.value("kind", "") != "dynaopt_policy") {
            throw ConfigError("policy checkpoint: wrong kind");
        }
        PolicyGenerator loaded;
        loaded.grid_sizes = j.at("grid_sizes").get<std::vector<int>>();
        for (const auto& h : j.at("heads")) loaded.heads.push_back(mlp_from_json(h));
        if (loaded.heads.size() != loaded.grid_sizes.size()) {
            throw ConfigError("policy checkpoint: head count mismatch");
        }
        for (std::size_t i = 0; i < loaded.heads.size(); ++i) {
            if (loaded.heads[i].output_size() != loaded.grid_sizes[i] ||
                loaded.heads[i].input_size() != 1) {
                throw ConfigError("policy checkpoint: head shape mismatch");
            }
        }
        const auto& b = j.at("baseline");
        Baseline loaded_baseline;
        loaded_baseline.value = b.at("value").get<double>();
        loaded_baseline.decay = b.at("decay").get<double>();
        loaded_baseline.initialized = b.at("initialized").get<bool>();
        policy = std::move(loaded);
        baseline = loaded_baseline;
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("malformed policy checkpoint: ") + e.what());
    }
}

}  // namespace dynaopt
