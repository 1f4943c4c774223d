#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dynaopt/json_io.hpp"
#include "dynaopt/rng.hpp"

namespace dynaopt {

enum class Activation { Identity, ReLU, Tanh, LogSoftmax };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Parameter gradients, shape-congruent with the owning Mlp.
struct Gradients {
    std::vector<std::vector<double>> weights;  // [layer][out * in], row-major
    std::vector<std::vector<double>> biases;   // [layer][out]

    void scale(double s);
    void add_scaled(const Gradients& other, double s);
};

// Dense feedforward net. Hidden layers share one activation; the output
// layer has its own (Identity or LogSoftmax).
class Mlp {
public:
    Mlp() = default;
    // Xavier-uniform weights in +/- sqrt(6 / (fan_in + fan_out)), zero biases.
    // Draw order is layer-major, row-major, so init is reproducible.
    Mlp(std::vector<int> layer_sizes, Activation hidden, Activation output, Rng& rng);

    int input_size() const { return layer_sizes_.front(); }
    int output_size() const { return layer_sizes_.back(); }
    const std::vector<int>& layer_sizes() const { return layer_sizes_; }
    Activation hidden_activation() const { return hidden_; }
    Activation output_activation() const { return output_; }
    std::size_t layer_count() const { return weights_.size(); }

    std::vector<double> forward(std::span<const double> input) const;

    // Gradient of upstream . output w.r.t. all parameters; recomputes the
    // forward pass internally, does not mutate the net.
    Gradients backward(std::span<const double> input, std::span<const double> upstream) const;
    // Same, accumulated into an existing (zero-initialized) Gradients.
    void accumulate_backward(std::span<const double> input, std::span<const double> upstream,
                             double scale, Gradients& into) const;

    Gradients zero_gradients() const;

    std::vector<std::vector<double>>& weights() { return weights_; }
    const std::vector<std::vector<double>>& weights() const { return weights_; }
    std::vector<std::vector<double>>& biases() { return biases_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    // Flat parameter view (weights then biases, layer by layer); used by the
    // finite-difference gradient check.
    std::size_t parameter_count() const;
    double parameter(std::size_t flat_index) const;
    void set_parameter(std::size_t flat_index, double value);

    bool same_architecture(const Mlp& other) const;

private:
    std::vector<int> layer_sizes_;
    Activation hidden_ = Activation::Identity;
    Activation output_ = Activation::Identity;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
};

enum class OptimizerKind { Sgd, Adam };

std::string optimizer_name(OptimizerKind k);
OptimizerKind optimizer_from_name(const std::string& name);

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Sgd;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step_count = 0;
    Gradients adam_m;  // sized lazily on first apply
    Gradients adam_v;

    static OptimizerState sgd(double learning_rate);
    static OptimizerState adam(double learning_rate, double beta1 = 0.9,
                               double beta2 = 0.999, double epsilon = 1e-8);
};

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate);

// In-place parameter update; increments opt.step_count by exactly 1.
void apply_update(Mlp& net, const Gradients& grads, OptimizerState& opt);

// Scalar loss of the network output, with its gradient w.r.t. the output.
struct LossProbe {
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> gradient;
};

// Max over parameters of |analytic - numeric| / max(1e-3, |analytic| + |numeric|),
// numeric by central differences with the given step.
double gradient_check(const Mlp& net, std::span<const double> input,
                      const LossProbe& loss, double step = 1e-4);

// Checkpoint format: layer_sizes, activations, nested weight/bias arrays,
// numbers as 17-significant-digit decimals (exact round-trip).
ordered_json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const ordered_json& j);

}  // namespace dynaopt
