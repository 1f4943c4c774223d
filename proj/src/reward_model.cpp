#include "dynaopt/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dynaopt/errors.hpp"

namespace dynaopt {

namespace {

constexpr int kHiddenSize = 16;
constexpr int kHiddenLayers = 3;

std::vector<int> model_layer_sizes(std::size_t input_dim, std::size_t outputs) {
    std::vector<int> sizes{static_cast<int>(input_dim)};
    for (int i = 0; i < kHiddenLayers; ++i) sizes.push_back(kHiddenSize);
    sizes.push_back(static_cast<int>(outputs));
    return sizes;
}

}  // namespace

std::string head_mode_name(HeadMode m) {
    return m == HeadMode::Scalar ? "scalar" : "per_metric";
}

HeadMode head_mode_from_name(const std::string& name) {
    if (name == "scalar") return HeadMode::Scalar;
    if (name == "per_metric") return HeadMode::PerMetric;
    throw ConfigError("unknown head mode: " + name);
}

RewardModel::RewardModel(std::size_t input_dim, HeadMode mode,
                         std::vector<std::string> metric_names,
                         std::vector<double> metric_weights, Rng& rng)
    : net_(model_layer_sizes(input_dim, mode == HeadMode::Scalar ? 1 : metric_names.size()),
           Activation::ReLU, Activation::Identity, rng),
      mode_(mode),
      metric_names_(std::move(metric_names)),
      metric_weights_(std::move(metric_weights)) {
    if (metric_names_.empty() || metric_names_.size() != metric_weights_.size()) {
        throw ConfigError("reward model: metric names/weights mismatch");
    }
    total_weight_ = std::accumulate(metric_weights_.begin(), metric_weights_.end(), 0.0);
}

RewardValue RewardModel::predict(const ActionVector& a, const ParameterSpace& space) const {
    const std::vector<double> x = space.normalize(a);
    if (static_cast<int>(x.size()) != net_.input_size()) {
        throw EvalError("reward model predict: space dimension mismatch");
    }
    const std::vector<double> out = net_.forward(x);
    RewardValue r;
    if (mode_ == HeadMode::Scalar) {
        r.total = std::clamp(out[0], -total_weight_, 0.0);
        return r;
    }
    for (std::size_t i = 0; i < metric_names_.size(); ++i) {
        const double ri = std::clamp(out[i], -1.0, 0.0);
        r.per_metric[metric_names_[i]] = ri;
        r.total += metric_weights_[i] * ri;
    }
    return r;
}

std::vector<double> RewardModel::targets_for(const Sample& s) const {
    if (mode_ == HeadMode::Scalar) return {s.reward.total};
    std::vector<double> t;
    t.reserve(metric_names_.size());
    for (const std::string& name : metric_names_) {
        const auto it = s.reward.per_metric.find(name);
        if (it == s.reward.per_metric.end()) {
            throw EvalError("reward model fit: sample lacks per-metric reward '" + name + "'");
        }
        t.push_back(it->second);
    }
    return t;
}

FitReport RewardModel::fit(const std::vector<Sample>& buffer, const ParameterSpace& space,
                           const RegressionConfig& cfg, Rng& rng) {
    if (cfg.epochs < 1 || cfg.batch_size < 1) {
        throw ConfigError("regression: epochs and batch_size must be positive");
    }
    if (cfg.holdout_fraction < 0.0 || cfg.holdout_fraction > 0.5) {
        throw ConfigError("regression: holdout_fraction must be in [0, 0.5]");
    }

    FitReport report;
    std::vector<std::vector<double>> xs;
    std::vector<std::vector<double>> ys;
    for (const Sample& s : buffer) {
        if (s.failed) {
            ++report.excluded_failures;
            continue;  // a -K penalty is a policy signal, not a measurement
        }
        xs.push_back(space.normalize(s.action));
        ys.push_back(targets_for(s));
    }
    report.used = static_cast<int>(xs.size());
    if (xs.empty()) {
        throw EvalError("reward model fit: no usable samples (all failed or empty buffer)");
    }

    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t n_holdout =
        std::min(xs.size() - 1, static_cast<std::size_t>(
                                    std::floor(cfg.holdout_fraction * static_cast<double>(xs.size()))));
    std::vector<std::size_t> holdout(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_holdout));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_holdout), order.end());
    report.train_count = static_cast<int>(train.size());
    report.holdout_count = static_cast<int>(holdout.size());

    const std::size_t n_out = static_cast<std::size_t>(net_.output_size());
    OptimizerState opt = make_optimizer(cfg.optimizer, cfg.learning_rate);

    Gradients grads = net_.zero_gradients();
    std::vector<double> upstream(n_out);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(train);
        for (std::size_t start = 0; start < train.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(train.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double inv = 1.0 / static_cast<double>(stop - start);
            grads = net_.zero_gradients();
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = train[k];
                const std::vector<double> out = net_.forward(xs[i]);
                // d/d_out of mean over outputs of (out - y)^2, averaged over
                // the batch.
                for (std::size_t o = 0; o < n_out; ++o) {
                    upstream[o] = 2.0 * (out[o] - ys[i][o]) / static_cast<double>(n_out);
                }
                net_.accumulate_backward(xs[i], upstream, inv, grads);
            }
            apply_update(net_, grads, opt);
        }
    }

    const auto mse_over = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
        double sum = 0.0;
        for (std::size_t i : idx) {
            const std::vector<double> out = net_.forward(xs[i]);
            for (std::size_t o = 0; o < n_out; ++o) {
                const double d = out[o] - ys[i][o];
                sum += d * d / static_cast<double>(n_out);
            }
        }
        return sum / static_cast<double>(idx.size());
    };
    report.train_mse = mse_over(train);
    report.holdout_mse = mse_over(holdout);
    return report;
}

void RewardModel::warm_start(const RewardModel& source) {
    if (!net_.same_architecture(source.net_) || mode_ != source.mode_ ||
        metric_names_ != source.metric_names_) {
        throw ConfigError("warm_start: architecture mismatch");
    }
    net_.weights() = source.net_.weights();
    net_.biases() = source.net_.biases();
}

RewardModel make_reward_model(const ParameterSpace& space,
                              const std::vector<ConstraintSpec>& constraints, HeadMode mode,
                              Rng& rng) {
    std::vector<std::string> names;
    std::vector<double> weights;
    for (const ConstraintSpec& c : constraints) {
        names.push_back(c.metric);
        weights.push_back(c.weight);
    }
    return RewardModel(space.size(), mode, std::move(names), std::move(weights), rng);
}

ordered_json reward_model_to_json(const RewardModel& model) {
    ordered_json j;
    j["kind"] = "dynaopt_reward_model";
    j["head_mode"] = head_mode_name(model.head_mode());
    j["metric_names"] = model.metric_names();
    j["metric_weights"] = model.metric_weights();
    j["net"] = mlp_to_json(model.net());
    return j;
}

RewardModel reward_model_from_json(const ordered_json& j) {
    try {
        if (j.value("kind", "") != "dynaopt_reward_model") {
            throw ConfigError("reward model checkpoint: wrong kind");
        }
        const HeadMode mode = head_mode_from_name(j.at("head_mode").get<std::string>());
        auto names = j.at("metric_names").get<std::vector<std::string>>();
        auto weights = j.at("metric_weights").get<std::vector<double>>();
        Mlp net = mlp_from_json(j.at("net"));
        Rng dummy(0);
        RewardModel model(static_cast<std::size_t>(net.input_size()), mode, std::move(names),
                          std::move(weights), dummy);
        if (!model.net().same_architecture(net)) {
            throw ConfigError("reward model checkpoint: unexpected architecture");
        }
        model.net().weights() = net.weights();
        model.net().biases() = net.biases();
        return model;
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("malformed reward model checkpoint: ") + e.what());
    }
}

}  // namespace dynaopt
