#include <cmath>
#include <vector>

#include "doctest.h"
#include "dynaopt/errors.hpp"
#include "dynaopt/nn.hpp"
#include "dynaopt/rng.hpp"

using namespace dynaopt;

namespace {

Mlp make_net(std::vector<int> sizes, Activation hidden, Activation output, std::uint64_t seed) {
    Rng rng(seed);
    return Mlp(std::move(sizes), hidden, output, rng);
}

// L = sum of squares of outputs; smooth, exercises every output.
LossProbe square_loss() {
    LossProbe probe;
    probe.value = [](std::span<const double> y) {
        double s = 0.0;
        for (double v : y) s += v * v;
        return s;
    };
    probe.gradient = [](std::span<const double> y) {
        std::vector<double> g(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) g[i] = 2.0 * y[i];
        return g;
    };
    return probe;
}

}  // namespace

TEST_CASE("xavier init bounds and zero biases") {
    Mlp net = make_net({7, 16, 1}, Activation::ReLU, Activation::Identity, 5);
    const double b0 = std::sqrt(6.0 / (7 + 16));
    for (double w : net.weights()[0]) CHECK(std::abs(w) <= b0);
    const double b1 = std::sqrt(6.0 / (16 + 1));
    for (double w : net.weights()[1]) CHECK(std::abs(w) <= b1);
    for (const auto& layer : net.biases()) {
        for (double b : layer) CHECK(b == 0.0);
    }
    // not all-zero weights
    double sum = 0.0;
    for (double w : net.weights()[0]) sum += std::abs(w);
    CHECK(sum > 0.0);
}

TEST_CASE("identity single layer passes input through") {
    Mlp net = make_net({2, 2}, Activation::Identity, Activation::Identity, 1);
    net.weights()[0] = {1.0, 0.0, 0.0, 1.0};
    net.biases()[0] = {0.0, 0.0};
    const std::vector<double> in{0.3, -0.5};
    const std::vector<double> out = net.forward(in);
    CHECK(out[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("zero-weight logsoftmax is uniform") {
    Mlp net = make_net({2, 2}, Activation::Identity, Activation::LogSoftmax, 1);
    net.weights()[0] = {0.0, 0.0, 0.0, 0.0};
    const std::vector<double> out = net.forward(std::vector<double>{3.0, -1.0});
    CHECK(out[0] == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(std::log(0.5)).epsilon(1e-15));
}

TEST_CASE("relu clamps negative preactivations") {
    Mlp net = make_net({1, 1, 1}, Activation::ReLU, Activation::Identity, 1);
    net.weights()[0] = {-1.0};
    net.weights()[1] = {1.0};
    const std::vector<double> out = net.forward(std::vector<double>{2.0});
    CHECK(out[0] == 0.0);
}

TEST_CASE("linear backward equals input") {
    Mlp net = make_net({1, 1}, Activation::Identity, Activation::Identity, 1);
    net.weights()[0] = {0.7};
    const Gradients g = net.backward(std::vector<double>{3.0}, std::vector<double>{1.0});
    CHECK(g.weights[0][0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(g.biases[0][0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("zero upstream gives zero gradients") {
    Mlp net = make_net({3, 8, 2}, Activation::Tanh, Activation::Identity, 2);
    const Gradients g =
        net.backward(std::vector<double>{0.1, -0.2, 0.4}, std::vector<double>{0.0, 0.0});
    for (const auto& layer : g.weights) {
        for (double v : layer) CHECK(v == 0.0);
    }
    for (const auto& layer : g.biases) {
        for (double v : layer) CHECK(v == 0.0);
    }
}

TEST_CASE("gradient check across architectures and activations") {
    Rng input_rng(77);
    // policy head shape and reward-model shape, plus tanh variants
    struct CaseSpec {
        std::vector<int> sizes;
        Activation hidden;
        Activation output;
    };
    const std::vector<CaseSpec> cases = {
        {{1, 32, 100}, Activation::Tanh, Activation::LogSoftmax},
        {{7, 16, 16, 16, 1}, Activation::ReLU, Activation::Identity},
        {{4, 8, 3}, Activation::Tanh, Activation::Identity},
        {{2, 6, 6, 2}, Activation::ReLU, Activation::Identity},
    };
    const LossProbe loss = square_loss();
    for (std::size_t c = 0; c < cases.size(); ++c) {
        for (int rep = 0; rep < 3; ++rep) {
            Mlp net = make_net(cases[c].sizes, cases[c].hidden, cases[c].output,
                               1000 + 10 * c + static_cast<std::uint64_t>(rep));
            std::vector<double> input(static_cast<std::size_t>(cases[c].sizes.front()));
            for (double& x : input) x = input_rng.normal();
            CHECK(gradient_check(net, input, loss) < 1e-4);
        }
    }
}

TEST_CASE("linear net with quadratic loss checks tightly") {
    Mlp net = make_net({3, 2}, Activation::Identity, Activation::Identity, 8);
    const std::vector<double> input{0.3, -1.1, 0.7};
    CHECK(gradient_check(net, input, square_loss()) < 1e-7);
}

TEST_CASE("accumulate_backward scales and sums") {
    Mlp net = make_net({2, 4, 1}, Activation::Tanh, Activation::Identity, 3);
    const std::vector<double> x{0.5, -0.3};
    const std::vector<double> up{1.0};
    const Gradients direct = net.backward(x, up);
    Gradients acc = net.zero_gradients();
    net.accumulate_backward(x, up, 0.5, acc);
    net.accumulate_backward(x, up, 0.5, acc);
    for (std::size_t l = 0; l < direct.weights.size(); ++l) {
        for (std::size_t i = 0; i < direct.weights[l].size(); ++i) {
            CHECK(acc.weights[l][i] == doctest::Approx(direct.weights[l][i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("sgd update rule") {
    Mlp net = make_net({1, 1}, Activation::Identity, Activation::Identity, 1);
    net.weights()[0] = {1.0};
    Gradients g = net.zero_gradients();
    g.weights[0][0] = 2.0;
    OptimizerState opt = OptimizerState::sgd(0.1);
    apply_update(net, g, opt);
    CHECK(net.weights()[0][0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(opt.step_count == 1);

    // zero gradient leaves the net unchanged
    Gradients z = net.zero_gradients();
    apply_update(net, z, opt);
    CHECK(net.weights()[0][0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("adam first step is lr-normalized") {
    Mlp net = make_net({1, 1}, Activation::Identity, Activation::Identity, 1);
    net.weights()[0] = {0.0};
    net.biases()[0] = {0.0};
    Gradients g = net.zero_gradients();
    g.weights[0][0] = 5.0;
    OptimizerState opt = OptimizerState::adam(0.01);
    apply_update(net, g, opt);
    // bias-corrected first step: mhat = g, vhat = g^2, so -lr * g / (|g| + eps)
    CHECK(net.weights()[0][0] == doctest::Approx(-0.01 * 5.0 / (5.0 + 1e-8)).epsilon(1e-12));
    CHECK(opt.step_count == 1);
}

TEST_CASE("flat parameter view round-trips") {
    Mlp net = make_net({3, 5, 2}, Activation::Tanh, Activation::Identity, 4);
    const std::size_t n = net.parameter_count();
    CHECK(n == 3 * 5 + 5 * 2 + 5 + 2);
    const double before = net.parameter(7);
    net.set_parameter(7, before + 1.5);
    CHECK(net.parameter(7) == doctest::Approx(before + 1.5).epsilon(1e-15));
    net.set_parameter(7, before);
    CHECK(net.parameter(7) == before);
}

TEST_CASE("json round-trip preserves outputs exactly") {
    Mlp net = make_net({4, 9, 3}, Activation::ReLU, Activation::Identity, 12);
    const Mlp back = mlp_from_json(mlp_to_json(net));
    CHECK(back.same_architecture(net));
    Rng rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> x(4);
        for (double& v : x) v = rng.normal();
        const auto y1 = net.forward(x);
        const auto y2 = back.forward(x);
        for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
    }
}

TEST_CASE("activation names round-trip") {
    for (Activation a : {Activation::Identity, Activation::ReLU, Activation::Tanh,
                         Activation::LogSoftmax}) {
        CHECK(activation_from_name(activation_name(a)) == a);
    }
    CHECK_THROWS_AS((void)activation_from_name("swish"), ConfigError);
    for (OptimizerKind k : {OptimizerKind::Sgd, OptimizerKind::Adam}) {
        CHECK(optimizer_from_name(optimizer_name(k)) == k);
    }
}

TEST_CASE("dimension errors throw") {
    Mlp net = make_net({2, 3}, Activation::Identity, Activation::Identity, 1);
    CHECK_THROWS((void)net.forward(std::vector<double>{1.0}));
    CHECK_THROWS((void)net.backward(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}));
}
