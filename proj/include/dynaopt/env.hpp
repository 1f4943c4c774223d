#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynaopt/param_space.hpp"
#include "dynaopt/reward.hpp"

namespace dynaopt {

enum class Phase { Schematic, PostLayout };

std::string phase_name(Phase p);
Phase phase_from_name(const std::string& name);

// Unit of the sample buffer B.
struct Sample {
    ActionVector action;
    MetricVector metrics;  // empty if failed
    RewardValue reward;
    Phase phase = Phase::Schematic;
    bool failed = false;
    long step = 0;
};

struct OpAmpModelConfig {
    double kn = 200e-6;      // A/V^2
    double kp = 100e-6;      // A/V^2
    double lambda_n = 0.1;   // 1/V
    double lambda_p = 0.1;   // 1/V
    double i_ref = 10e-6;    // A
    double c_load = 10e-12;  // F
    double c_par = 0.0;      // F, 0 for the schematic variant
    double vdd = 1.8;        // V
};

void validate_opamp_config(const OpAmpModelConfig& cfg);

// Evaluation backend contract. evaluate returns metrics or nullopt (failure
// sample). Batched evaluation preserves submission order.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual std::optional<MetricVector> evaluate(const ActionVector& a) = 0;
    virtual std::vector<std::optional<MetricVector>> evaluate_batch(
        const std::vector<ActionVector>& actions);
    // Pure evaluators return identical metrics for identical actions.
    virtual bool pure() const = 0;
};

// Closed-form square-law two-stage Miller op-amp. Deterministic; emits
// {gain [V/V], ugbw [Hz], phase_margin [deg], ibias [A]}. The phase margin
// is floored at 0 so metrics stay in the score's non-negative domain.
MetricVector opamp_evaluate(const OpAmpModelConfig& cfg, const ParameterSpace& space,
                            const ActionVector& a);

class OpAmpEvaluator : public Evaluator {
public:
    OpAmpEvaluator(OpAmpModelConfig cfg, ParameterSpace space);
    std::optional<MetricVector> evaluate(const ActionVector& a) override;
    bool pure() const override { return true; }
    const OpAmpModelConfig& config() const { return cfg_; }

private:
    OpAmpModelConfig cfg_;
    ParameterSpace space_;
};

// Schematic forces c_par = 0; PostLayout keeps cfg.c_par (default 200 pF).
std::unique_ptr<Evaluator> make_env(Phase phase, OpAmpModelConfig cfg,
                                    const ParameterSpace& space);

// Default parasitic load added by the post-layout variant.
inline constexpr double kDefaultPostLayoutCPar = 200e-12;

// Test/instrumentation helpers.
class CountingEvaluator : public Evaluator {
public:
    explicit CountingEvaluator(Evaluator& inner) : inner_(inner) {}
    std::optional<MetricVector> evaluate(const ActionVector& a) override {
        ++count_;
        return inner_.evaluate(a);
    }
    std::vector<std::optional<MetricVector>> evaluate_batch(
        const std::vector<ActionVector>& actions) override {
        count_ += static_cast<long>(actions.size());
        return inner_.evaluate_batch(actions);
    }
    bool pure() const override { return inner_.pure(); }
    long count() const { return count_; }

private:
    Evaluator& inner_;
    long count_ = 0;
};

class FunctionEvaluator : public Evaluator {
public:
    using Fn = std::function<std::optional<MetricVector>(const ActionVector&)>;
    explicit FunctionEvaluator(Fn fn, bool pure = true) : fn_(std::move(fn)), pure_(pure) {}
    std::optional<MetricVector> evaluate(const ActionVector& a) override { return fn_(a); }
    bool pure() const override { return pure_; }

private:
    Fn fn_;
    bool pure_;
};

}  // namespace dynaopt
