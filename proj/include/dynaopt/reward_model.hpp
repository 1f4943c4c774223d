#pragma once

#include <string>
#include <vector>

#include "dynaopt/env.hpp"
#include "dynaopt/nn.hpp"
#include "dynaopt/param_space.hpp"
#include "dynaopt/reward.hpp"
#include "dynaopt/rng.hpp"

namespace dynaopt {

enum class HeadMode { Scalar, PerMetric };

std::string head_mode_name(HeadMode m);
HeadMode head_mode_from_name(const std::string& name);

struct RegressionConfig {
    int epochs = 500;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double holdout_fraction = 0.2;  // in [0, 0.5]
    OptimizerKind optimizer = OptimizerKind::Adam;
};

struct FitReport {
    double train_mse = 0.0;
    double holdout_mse = 0.0;  // NaN when no holdout split was possible
    int used = 0;              // samples after excluding failures
    int excluded_failures = 0;
    int train_count = 0;
    int holdout_count = 0;
};

// Learned surrogate rho_phi: normalized action indices -> reward. One net,
// input T, hidden 16-16-16 ReLU; the last linear layer is the scalar head or
// the K per-metric heads sharing that backbone.
class RewardModel {
public:
    RewardModel(std::size_t input_dim, HeadMode mode, std::vector<std::string> metric_names,
                std::vector<double> metric_weights, Rng& rng);

    // Scalar: total = clamp(out, -K, 0), per_metric empty.
    // PerMetric: r_i = clamp(out_i, -1, 0), total = sum w_i r_i.
    RewardValue predict(const ActionVector& a, const ParameterSpace& space) const;

    // Minibatch MSE regression on the buffer, failures excluded; the holdout
    // split is drawn from rng before training and never trained on.
    FitReport fit(const std::vector<Sample>& buffer, const ParameterSpace& space,
                  const RegressionConfig& cfg, Rng& rng);

    // Copies all weights from source (identical architecture required).
    void warm_start(const RewardModel& source);

    HeadMode head_mode() const { return mode_; }
    const std::vector<std::string>& metric_names() const { return metric_names_; }
    const std::vector<double>& metric_weights() const { return metric_weights_; }
    const Mlp& net() const { return net_; }
    Mlp& net() { return net_; }

private:
    std::vector<double> targets_for(const Sample& s) const;

    Mlp net_;
    HeadMode mode_;
    std::vector<std::string> metric_names_;   // constrained metrics, in order
    std::vector<double> metric_weights_;
    double total_weight_ = 0.0;               // K
};

// Convenience: dimensions and heads from (space, constraints).
RewardModel make_reward_model(const ParameterSpace& space,
                              const std::vector<ConstraintSpec>& constraints, HeadMode mode,
                              Rng& rng);

ordered_json reward_model_to_json(const RewardModel& model);
RewardModel reward_model_from_json(const ordered_json& j);

}  // namespace dynaopt
