#include <cmath>

#include "doctest.h"
#include "dynaopt/env.hpp"
#include "dynaopt/errors.hpp"
#include "dynaopt/rng.hpp"

using namespace dynaopt;

namespace {

constexpr double kPi = 3.14159265358979323846;

ParamSpec linear_param(const std::string& name, std::vector<double> grid) {
    ParamSpec p;
    p.name = name;
    p.scale = GridScale::Linear;
    p.grid = std::move(grid);
    return p;
}

// Exact-valued space so hand oracles need no grid interpolation.
// Order matches the default space: w_in w_load w_tail w_out w_sink w_bias cc.
ParameterSpace exact_space() {
    return ParameterSpace({
        linear_param("w_in", {1.0, 100.0}),
        linear_param("w_load", {1.0, 50.0}),
        linear_param("w_tail", {1.0, 5.0}),
        linear_param("w_out", {50.0, 100.0}),
        linear_param("w_sink", {1.0, 10.0}),
        linear_param("w_bias", {1.0, 2.0}),
        linear_param("cc", {1e-12, 10e-12}),
    });
}

ActionVector action(std::vector<int> idx) {
    ActionVector a;
    a.indices = std::move(idx);
    return a;
}

}  // namespace

TEST_CASE("ugbw matches the gm over two-pi-C oracle") {
    // w_in=100, w_tail=5, w_bias=1, cc=1 pF: I_tail = 50 uA,
    // gm1 = sqrt(kn * w_in * I_tail) = sqrt(1e-6) = 1 mS.
    const MetricVector m =
        opamp_evaluate(OpAmpModelConfig{}, exact_space(), action({1, 0, 1, 0, 0, 0, 0}));
    CHECK(m.at("ugbw") == doctest::Approx(1e-3 / (2.0 * kPi * 1e-12)).epsilon(1e-12));
    CHECK(m.at("ugbw") == doctest::Approx(159.1549431e6).epsilon(1e-9));
}

TEST_CASE("gain matches the hand-computed two-stage product") {
    // Same action: stage1 = gm1 / (0.2 * I_tail / 2) = 1e-3 / 5e-6 = 200;
    // I_out = 10 uA, gm6 = sqrt(2 * kp * 50 * 10e-6) = sqrt(1e-7),
    // stage2 = gm6 / (0.2 * 10e-6) = 158.113883; product = 31622.7766.
    const MetricVector m =
        opamp_evaluate(OpAmpModelConfig{}, exact_space(), action({1, 0, 1, 0, 0, 0, 0}));
    CHECK(m.at("gain") == doctest::Approx(31622.776601683792).epsilon(1e-9));
}

TEST_CASE("mirror ratio one gives ibias of three i_ref") {
    // w_tail = w_sink = w_bias = 1
    const MetricVector m =
        opamp_evaluate(OpAmpModelConfig{}, exact_space(), action({0, 0, 0, 0, 0, 0, 0}));
    CHECK(m.at("ibias") == doctest::Approx(3.0 * 10e-6).epsilon(1e-12));
}

TEST_CASE("phase margin formula on an unclamped action") {
    // w_in=1, w_tail=1, w_bias=1, w_out=100, w_sink=10, cc=10 pF:
    // gm1 = sqrt(2e-9), ugbw = gm1/(2 pi 1e-11); gm6 = sqrt(2e-6),
    // p2 = z1 = gm6/(2 pi 1e-11).
    const ActionVector a = action({0, 0, 0, 1, 1, 0, 1});
    const MetricVector m = opamp_evaluate(OpAmpModelConfig{}, exact_space(), a);
    const double gm1 = std::sqrt(2e-9);
    const double gm6 = std::sqrt(2e-6);
    const double ugbw = gm1 / (2.0 * kPi * 1e-11);
    const double pole2 = gm6 / (2.0 * kPi * 1e-11);
    const double expect =
        90.0 - std::atan(ugbw / pole2) * 180.0 / kPi - std::atan(ugbw / pole2) * 180.0 / kPi;
    CHECK(m.at("phase_margin") == doctest::Approx(expect).epsilon(1e-12));
    CHECK(m.at("phase_margin") > 80.0);

    // post-layout load lowers the second pole, so PM strictly drops
    OpAmpModelConfig post;
    post.c_par = 200e-12;
    const MetricVector mp = opamp_evaluate(post, exact_space(), a);
    CHECK(mp.at("phase_margin") < m.at("phase_margin"));
    CHECK(mp.at("phase_margin") > 0.0);
    CHECK(mp.at("gain") == m.at("gain"));
    CHECK(mp.at("ugbw") == m.at("ugbw"));
    CHECK(mp.at("ibias") == m.at("ibias"));
}

TEST_CASE("phase margin is floored at zero") {
    // high ugbw with low poles: w_in=100, w_tail=5, cc=1 pF starves PM
    const MetricVector m =
        opamp_evaluate(OpAmpModelConfig{}, exact_space(), action({1, 0, 1, 0, 0, 0, 0}));
    CHECK(m.at("phase_margin") == 0.0);
}

TEST_CASE("metrics are finite and non-negative across the default grid") {
    const ParameterSpace space = default_opamp_space();
    Rng rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        ActionVector a;
        for (std::size_t i = 0; i < space.size(); ++i) {
            a.indices.push_back(static_cast<int>(rng.uniform_index(100)));
        }
        const MetricVector m = opamp_evaluate(OpAmpModelConfig{}, space, a);
        for (const auto& [name, v] : m) {
            REQUIRE(std::isfinite(v));
            REQUIRE(v >= 0.0);
        }
        CHECK(m.size() == 4);
        CHECK(m.at("phase_margin") < 90.0);
    }
}

TEST_CASE("w_load is inert") {
    const ParameterSpace space = default_opamp_space();
    ActionVector a = action({10, 0, 30, 40, 50, 60, 70});
    ActionVector b = a;
    b.indices[1] = 99;
    CHECK(opamp_evaluate(OpAmpModelConfig{}, space, a) ==
          opamp_evaluate(OpAmpModelConfig{}, space, b));
}

TEST_CASE("evaluator is pure and deterministic") {
    OpAmpEvaluator env(OpAmpModelConfig{}, default_opamp_space());
    CHECK(env.pure());
    const ActionVector a = action({5, 10, 15, 20, 25, 30, 35});
    const auto m1 = env.evaluate(a);
    const auto m2 = env.evaluate(a);
    REQUIRE(m1.has_value());
    CHECK(*m1 == *m2);

    const std::vector<ActionVector> batch{a, action({1, 2, 3, 4, 5, 6, 7}),
                                          action({99, 99, 99, 99, 99, 99, 99})};
    const auto results = env.evaluate_batch(batch);
    REQUIRE(results.size() == 3);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        CHECK(*results[i] == *env.evaluate(batch[i]));
    }
}

TEST_CASE("make_env phase handling") {
    const ParameterSpace space = default_opamp_space();
    const ActionVector a = action({0, 0, 0, 99, 20, 10, 99});

    OpAmpModelConfig leaky;
    leaky.c_par = 5e-12;  // schematic must ignore this
    const auto schem = make_env(Phase::Schematic, leaky, space)->evaluate(a);
    const auto clean = make_env(Phase::Schematic, OpAmpModelConfig{}, space)->evaluate(a);
    CHECK(*schem == *clean);

    OpAmpModelConfig explicit_par;
    explicit_par.c_par = 200e-12;
    const auto post_default = make_env(Phase::PostLayout, OpAmpModelConfig{}, space)->evaluate(a);
    const auto post_explicit = make_env(Phase::PostLayout, explicit_par, space)->evaluate(a);
    CHECK(*post_default == *post_explicit);

    OpAmpModelConfig custom;
    custom.c_par = 50e-12;
    const auto post_custom = make_env(Phase::PostLayout, custom, space)->evaluate(a);
    CHECK(post_custom->at("phase_margin") != post_default->at("phase_margin"));

    // parasitic affects only the phase margin
    CHECK(post_default->at("gain") == schem->at("gain"));
    CHECK(post_default->at("ugbw") == schem->at("ugbw"));
    CHECK(post_default->at("ibias") == schem->at("ibias"));
}

TEST_CASE("monotonicity spot checks") {
    const ParameterSpace space = default_opamp_space();
    const OpAmpModelConfig cfg;
    const ActionVector base = action({50, 50, 50, 50, 50, 50, 50});

    ActionVector hi = base;
    hi.indices[0] = 60;  // more w_in -> more gm1 -> more gain
    CHECK(opamp_evaluate(cfg, space, hi).at("gain") >
          opamp_evaluate(cfg, space, base).at("gain"));

    hi = base;
    hi.indices[6] = 60;  // more cc -> lower ugbw
    CHECK(opamp_evaluate(cfg, space, hi).at("ugbw") <
          opamp_evaluate(cfg, space, base).at("ugbw"));

    hi = base;
    hi.indices[2] = 60;  // more tail current -> more ibias
    CHECK(opamp_evaluate(cfg, space, hi).at("ibias") >
          opamp_evaluate(cfg, space, base).at("ibias"));
}

TEST_CASE("constructor validation") {
    CHECK_NOTHROW(OpAmpEvaluator(OpAmpModelConfig{}, default_opamp_space()));
    OpAmpModelConfig bad;
    bad.kn = -1.0;
    CHECK_THROWS_AS(OpAmpEvaluator(bad, default_opamp_space()), ConfigError);
    CHECK_THROWS_AS(validate_opamp_config(bad), ConfigError);

    // space missing a required parameter
    const ParameterSpace incomplete({
        linear_param("w_in", {1.0, 100.0}),
        linear_param("cc", {1e-12, 10e-12}),
    });
    CHECK_THROWS_AS(OpAmpEvaluator(OpAmpModelConfig{}, incomplete), ConfigError);
}

TEST_CASE("counting evaluator counts both call paths") {
    OpAmpEvaluator inner(OpAmpModelConfig{}, default_opamp_space());
    CountingEvaluator env(inner);
    const ActionVector a = action({1, 2, 3, 4, 5, 6, 7});
    (void)env.evaluate(a);
    (void)env.evaluate_batch({a, a, a});
    CHECK(env.count() == 4);
}

TEST_CASE("phase names round-trip") {
    CHECK(phase_from_name(phase_name(Phase::Schematic)) == Phase::Schematic);
    CHECK(phase_from_name(phase_name(Phase::PostLayout)) == Phase::PostLayout);
    CHECK_THROWS((void)phase_from_name("layout"));
}
