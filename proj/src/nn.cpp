#include "dynaopt/nn.hpp"

#include <algorithm>
#include <cmath>

#include "dynaopt/errors.hpp"

namespace dynaopt {

namespace {

void apply_activation(Activation act, std::vector<double>& v) {
    switch (act) {
        case Activation::Identity:
            return;
        case Activation::ReLU:
            for (double& x : v) x = x > 0.0 ? x : 0.0;
            return;
        case Activation::Tanh:
            for (double& x : v) x = std::tanh(x);
            return;
        case Activation::LogSoftmax: {
            double m = v[0];
            for (double x : v) m = std::max(m, x);
            double sum = 0.0;
            for (double x : v) sum += std::exp(x - m);
            const double lse = m + std::log(sum);
            for (double& x : v) x -= lse;
            return;
        }
    }
}

// dL/d(pre-activation) from dL/d(post-activation). `a` is the activated
// output of the layer.
std::vector<double> activation_backward(Activation act, const std::vector<double>& a,
                                        const std::vector<double>& g) {
    std::vector<double> out(g.size());
    switch (act) {
        case Activation::Identity:
            out = g;
            return out;
        case Activation::ReLU:
            for (std::size_t i = 0; i < g.size(); ++i) out[i] = a[i] > 0.0 ? g[i] : 0.0;
            return out;
        case Activation::Tanh:
            for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] * (1.0 - a[i] * a[i]);
            return out;
        case Activation::LogSoftmax: {
            // o_j = z_j - lse(z); dL/dz_j = g_j - softmax_j * sum_i g_i
            double gsum = 0.0;
            for (double x : g) gsum += x;
            for (std::size_t i = 0; i < g.size(); ++i) {
                out[i] = g[i] - std::exp(a[i]) * gsum;
            }
            return out;
        }
    }
    return out;
}

}  // namespace

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::LogSoftmax: return "log_softmax";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    if (name == "log_softmax") return Activation::LogSoftmax;
    throw ConfigError("unknown activation: " + name);
}

std::string optimizer_name(OptimizerKind k) {
    return k == OptimizerKind::Sgd ? "sgd" : "adam";
}

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer: " + name);
}

void Gradients::scale(double s) {
    for (auto& layer : weights)
        for (double& g : layer) g *= s;
    for (auto& layer : biases)
        for (double& g : layer) g *= s;
}

void Gradients::add_scaled(const Gradients& other, double s) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += s * other.weights[l][i];
        for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += s * other.biases[l][i];
    }
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation hidden, Activation output, Rng& rng)
    : layer_sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output) {
    if (layer_sizes_.size() < 2) {
        throw ConfigError("Mlp needs at least input and output layers");
    }
    for (int s : layer_sizes_) {
        if (s < 1) throw ConfigError("Mlp layer sizes must be positive");
    }
    const std::size_t n_layers = layer_sizes_.size() - 1;
    weights_.resize(n_layers);
    biases_.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int fan_in = layer_sizes_[l];
        const int fan_out = layer_sizes_[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        weights_[l].resize(static_cast<std::size_t>(fan_in) * fan_out);
        for (double& w : weights_[l]) w = (2.0 * rng.uniform01() - 1.0) * limit;
        biases_[l].assign(static_cast<std::size_t>(fan_out), 0.0);
    }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != input_size()) {
        throw EvalError("Mlp::forward: input size mismatch");
    }
    std::vector<double> x(input.begin(), input.end());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const int n_in = layer_sizes_[l];
        const int n_out = layer_sizes_[l + 1];
        std::vector<double> y(static_cast<std::size_t>(n_out));
        const double* w = weights_[l].data();
        for (int r = 0; r < n_out; ++r) {
            double acc = biases_[l][static_cast<std::size_t>(r)];
            const double* row = w + static_cast<std::size_t>(r) * n_in;
            for (int c = 0; c < n_in; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(r)] = acc;
        }
        apply_activation(l + 1 == weights_.size() ? output_ : hidden_, y);
        x = std::move(y);
    }
    return x;
}

Gradients Mlp::zero_gradients() const {
    Gradients g;
    g.weights.resize(weights_.size());
    g.biases.resize(biases_.size());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        g.weights[l].assign(weights_[l].size(), 0.0);
        g.biases[l].assign(biases_[l].size(), 0.0);
    }
    return g;
}

void Mlp::accumulate_backward(std::span<const double> input, std::span<const double> upstream,
                              double scale, Gradients& into) const {
    if (static_cast<int>(input.size()) != input_size()) {
        throw EvalError("Mlp::backward: input size mismatch");
    }
    if (static_cast<int>(upstream.size()) != output_size()) {
        throw EvalError("Mlp::backward: upstream size mismatch");
    }
    // Forward pass, keeping every layer's activated output.
    std::vector<std::vector<double>> acts;
    acts.reserve(weights_.size() + 1);
    acts.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const int n_in = layer_sizes_[l];
        const int n_out = layer_sizes_[l + 1];
        std::vector<double> y(static_cast<std::size_t>(n_out));
        const double* w = weights_[l].data();
        for (int r = 0; r < n_out; ++r) {
            double acc = biases_[l][static_cast<std::size_t>(r)];
            const double* row = w + static_cast<std::size_t>(r) * n_in;
            for (int c = 0; c < n_in; ++c) acc += row[c] * acts.back()[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(r)] = acc;
        }
        apply_activation(l + 1 == weights_.size() ? output_ : hidden_, y);
        acts.push_back(std::move(y));
    }
    // Backward pass.
    std::vector<double> g(upstream.begin(), upstream.end());
    for (std::size_t l = weights_.size(); l-- > 0;) {
        const int n_in = layer_sizes_[l];
        const int n_out = layer_sizes_[l + 1];
        const Activation act = l + 1 == weights_.size() ? output_ : hidden_;
        std::vector<double> gz = activation_backward(act, acts[l + 1], g);
        double* gw = into.weights[l].data();
        const std::vector<double>& prev = acts[l];
        for (int r = 0; r < n_out; ++r) {
            const double gr = scale * gz[static_cast<std::size_t>(r)];
            double* grow = gw + static_cast<std::size_t>(r) * n_in;
            for (int c = 0; c < n_in; ++c) grow[c] += gr * prev[static_cast<std::size_t>(c)];
            into.biases[l][static_cast<std::size_t>(r)] += gr;
        }
        if (l > 0) {
            std::vector<double> gprev(static_cast<std::size_t>(n_in), 0.0);
            const double* w = weights_[l].data();
            for (int r = 0; r < n_out; ++r) {
                const double gr = gz[static_cast<std::size_t>(r)];
                const double* row = w + static_cast<std::size_t>(r) * n_in;
                for (int c = 0; c < n_in; ++c) gprev[static_cast<std::size_t>(c)] += gr * row[c];
            }
            g = std::move(gprev);
        }
    }
}

Gradients Mlp::backward(std::span<const double> input, std::span<const double> upstream) const {
    Gradients g = zero_gradients();
    accumulate_backward(input, upstream, 1.0, g);
    return g;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
}

double Mlp::parameter(std::size_t flat_index) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (flat_index < weights_[l].size()) return weights_[l][flat_index];
        flat_index -= weights_[l].size();
        if (flat_index < biases_[l].size()) return biases_[l][flat_index];
        flat_index -= biases_[l].size();
    }
    throw EvalError("Mlp::parameter: index out of range");
}

void Mlp::set_parameter(std::size_t flat_index, double value) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (flat_index < weights_[l].size()) {
            weights_[l][flat_index] = value;
            return;
        }
        flat_index -= weights_[l].size();
        if (flat_index < biases_[l].size()) {
            biases_[l][flat_index] = value;
            return;
        }
        flat_index -= biases_[l].size();
    }
    throw EvalError("Mlp::set_parameter: index out of range");
}

bool Mlp::same_architecture(const Mlp& other) const {
    return layer_sizes_ == other.layer_sizes_ && hidden_ == other.hidden_ &&
           output_ == other.output_;
}

OptimizerState OptimizerState::sgd(double learning_rate) {
    OptimizerState o;
    o.kind = OptimizerKind::Sgd;
    o.learning_rate = learning_rate;
    return o;
}

OptimizerState OptimizerState::adam(double learning_rate, double beta1, double beta2,
                                    double epsilon) {
    OptimizerState o;
    o.kind = OptimizerKind::Adam;
    o.learning_rate = learning_rate;
    o.beta1 = beta1;
    o.beta2 = beta2;
    o.epsilon = epsilon;
    return o;
}

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate) {
    return kind == OptimizerKind::Sgd ? OptimizerState::sgd(learning_rate)
                                      : OptimizerState::adam(learning_rate);
}

void apply_update(Mlp& net, const Gradients& grads, OptimizerState& opt) {
    auto& w = net.weights();
    auto& b = net.biases();
    if (grads.weights.size() != w.size() || grads.biases.size() != b.size()) {
        throw EvalError("apply_update: gradient shape mismatch");
    }
    for (std::size_t l = 0; l < w.size(); ++l) {
        if (grads.weights[l].size() != w[l].size() || grads.biases[l].size() != b[l].size()) {
            throw EvalError("apply_update: gradient shape mismatch");
        }
    }
    opt.step_count += 1;
    if (opt.kind == OptimizerKind::Sgd) {
        for (std::size_t l = 0; l < w.size(); ++l) {
            for (std::size_t i = 0; i < w[l].size(); ++i)
                w[l][i] -= opt.learning_rate * grads.weights[l][i];
            for (std::size_t i = 0; i < b[l].size(); ++i)
                b[l][i] -= opt.learning_rate * grads.biases[l][i];
        }
        return;
    }
    // Adam, bias-corrected; epsilon added outside the square root.
    if (opt.adam_m.weights.size() != w.size()) {
        opt.adam_m = net.zero_gradients();
        opt.adam_v = net.zero_gradients();
    }
    const double b1 = opt.beta1;
    const double b2 = opt.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(opt.step_count));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(opt.step_count));
    auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            params[i] -= opt.learning_rate * mhat / (std::sqrt(vhat) + opt.epsilon);
        }
    };
    for (std::size_t l = 0; l < w.size(); ++l) {
        update(w[l], grads.weights[l], opt.adam_m.weights[l], opt.adam_v.weights[l]);
        update(b[l], grads.biases[l], opt.adam_m.biases[l], opt.adam_v.biases[l]);
    }
}

double gradient_check(const Mlp& net, std::span<const double> input, const LossProbe& loss,
                      double step) {
    const std::vector<double> out = net.forward(input);
    const std::vector<double> upstream = loss.gradient(out);
    const Gradients analytic = net.backward(input, upstream);

    // Flatten in the same order as Mlp::parameter.
    std::vector<double> flat;
    for (std::size_t l = 0; l < analytic.weights.size(); ++l) {
        flat.insert(flat.end(), analytic.weights[l].begin(), analytic.weights[l].end());
        flat.insert(flat.end(), analytic.biases[l].begin(), analytic.biases[l].end());
    }

    Mlp probe = net;
    double worst = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double saved = probe.parameter(i);
        probe.set_parameter(i, saved + step);
        const double up = loss.value(probe.forward(input));
        probe.set_parameter(i, saved - step);
        const double down = loss.value(probe.forward(input));
        probe.set_parameter(i, saved);
        const double numeric = (up - down) / (2.0 * step);
        // The floor keeps rounding noise on dead paths (analytic gradient 0,
        // numeric ~1e-12) from registering as relative error.
        const double denom = std::max(1e-3, std::abs(flat[i]) + std::abs(numeric));
        worst = std::max(worst, std::abs(flat[i] - numeric) / denom);
    }
    return worst;
}

ordered_json mlp_to_json(const Mlp& net) {
    ordered_json j;
    j["layer_sizes"] = net.layer_sizes();
    j["hidden_activation"] = activation_name(net.hidden_activation());
    j["output_activation"] = activation_name(net.output_activation());
    ordered_json weights = ordered_json::array();
    ordered_json biases = ordered_json::array();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const int n_in = net.layer_sizes()[l];
        const int n_out = net.layer_sizes()[l + 1];
        ordered_json rows = ordered_json::array();
        for (int r = 0; r < n_out; ++r) {
            ordered_json row = ordered_json::array();
            for (int c = 0; c < n_in; ++c) {
                row.push_back(net.weights()[l][static_cast<std::size_t>(r) * n_in + c]);
            }
            rows.push_back(std::move(row));
        }
        weights.push_back(std::move(rows));
        biases.push_back(net.biases()[l]);
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    return j;
}

Mlp mlp_from_json(const ordered_json& j) {
    try {
        const std::vector<int> sizes = j.at("layer_sizes").get<std::vector<int>>();
        const Activation hidden = activation_from_name(j.at("hidden_activation").get<std::string>());
        const Activation output = activation_from_name(j.at("output_activation").get<std::string>());
        Rng dummy(0);
        Mlp net(sizes, hidden, output, dummy);
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        if (weights.size() != net.layer_count() || biases.size() != net.layer_count()) {
            throw ConfigError("checkpoint layer count mismatch");
        }
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            const int n_in = sizes[l];
            const int n_out = sizes[l + 1];
            const auto& rows = weights[l];
            if (static_cast<int>(rows.size()) != n_out) {
                throw ConfigError("checkpoint weight shape mismatch");
            }
            for (int r = 0; r < n_out; ++r) {
                const auto& row = rows[static_cast<std::size_t>(r)];
                if (static_cast<int>(row.size()) != n_in) {
                    throw ConfigError("checkpoint weight shape mismatch");
                }
                for (int c = 0; c < n_in; ++c) {
                    net.weights()[l][static_cast<std::size_t>(r) * n_in + c] =
                        row[static_cast<std::size_t>(c)].get<double>();
                }
            }
            const auto& bias = biases[l];
            if (static_cast<int>(bias.size()) != n_out) {
                throw ConfigError("checkpoint bias shape mismatch");
            }
            net.biases()[l] = bias.get<std::vector<double>>();
        }
        return net;
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("malformed network checkpoint: ") + e.what());
    }
}

}  // namespace dynaopt
