#include "dynaopt/env.hpp"

#include <cmath>

#include "dynaopt/errors.hpp"

namespace dynaopt {

namespace {

constexpr double kPi = 3.14159265358979323846;

int required_param(const ParameterSpace& space, const std::string& name) {
    const int i = space.index_of(name);
    if (i < 0) {
        throw ConfigError("op-amp model: parameter space lacks '" + name + "'");
    }
    return i;
}

}  // namespace

std::string phase_name(Phase p) {
    return p == Phase::Schematic ? "schematic" : "post_layout";
}

Phase phase_from_name(const std::string& name) {
    if (name == "schematic") return Phase::Schematic;
    if (name == "post_layout") return Phase::PostLayout;
    throw ConfigError("unknown phase: " + name);
}

void validate_opamp_config(const OpAmpModelConfig& cfg) {
    const double positives[] = {cfg.kn, cfg.kp, cfg.lambda_n, cfg.lambda_p,
                                cfg.i_ref, cfg.c_load, cfg.vdd};
    for (double v : positives) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("op-amp model: constants must be positive and finite");
        }
    }
    if (cfg.c_par < 0.0 || !std::isfinite(cfg.c_par)) {
        throw ConfigError("op-amp model: c_par must be >= 0");
    }
}

std::vector<std::optional<MetricVector>> Evaluator::evaluate_batch(
    const std::vector<ActionVector>& actions) {
    std::vector<std::optional<MetricVector>> out;
    out.reserve(actions.size());
    for (const ActionVector& a : actions) out.push_back(evaluate(a));
    return out;
}

MetricVector opamp_evaluate(const OpAmpModelConfig& cfg, const ParameterSpace& space,
                            const ActionVector& a) {
    const std::vector<double> v = space.decode(a);
    const double w_in = v[static_cast<std::size_t>(required_param(space, "w_in"))];
    const double w_tail = v[static_cast<std::size_t>(required_param(space, "w_tail"))];
    const double w_out = v[static_cast<std::size_t>(required_param(space, "w_out"))];
    const double w_sink = v[static_cast<std::size_t>(required_param(space, "w_sink"))];
    const double w_bias = v[static_cast<std::size_t>(required_param(space, "w_bias"))];
    const double cc = v[static_cast<std::size_t>(required_param(space, "cc"))];
    for (double x : {w_in, w_tail, w_out, w_sink, w_bias, cc}) {
        if (!(x > 0.0)) throw EvalError("op-amp model: decoded values must be positive");
    }

    // Current mirrors off the reference branch.
    const double i_tail = cfg.i_ref * (w_tail / w_bias);
    const double i_out = cfg.i_ref * (w_sink / w_bias);

    // Square-law transconductances (input pair runs at I_tail/2).
    const double gm1 = std::sqrt(2.0 * cfg.kn * w_in * (i_tail / 2.0));
    const double gm6 = std::sqrt(2.0 * cfg.kp * w_out * i_out);

    const double lambda_sum = cfg.lambda_n + cfg.lambda_p;
    const double gain =
        (gm1 / (lambda_sum * (i_tail / 2.0))) * (gm6 / (lambda_sum * i_out));

    const double ugbw = gm1 / (2.0 * kPi * cc);

    // Miller compensation: output pole against the (possibly parasitic-
    // augmented) load, right-half-plane zero through cc.
    const double c_eff = cfg.c_load + cfg.c_par;
    const double p2 = gm6 / (2.0 * kPi * c_eff);
    const double z1 = gm6 / (2.0 * kPi * cc);
    const double lag_deg =
        (std::atan(ugbw / p2) + std::atan(ugbw / z1)) * (180.0 / kPi);
    // Floored at 0: the reward normalization needs non-negative metrics, and a
    // margin below zero is simply "unstable".
    const double phase_margin = std::max(0.0, 90.0 - lag_deg);

    const double ibias = cfg.i_ref + i_tail + i_out;

    for (double x : {gain, ugbw, phase_margin, ibias}) {
        if (!std::isfinite(x)) {
            throw EvalError("op-amp model: non-finite metric");
        }
    }
    return MetricVector{
        {"gain", gain}, {"ugbw", ugbw}, {"phase_margin", phase_margin}, {"ibias", ibias}};
}

OpAmpEvaluator::OpAmpEvaluator(OpAmpModelConfig cfg, ParameterSpace space)
    : cfg_(cfg), space_(std::move(space)) {
    validate_opamp_config(cfg_);
    for (const char* name : {"w_in", "w_tail", "w_out", "w_sink", "w_bias", "cc"}) {
        required_param(space_, name);
    }
}

std::optional<MetricVector> OpAmpEvaluator::evaluate(const ActionVector& a) {
    try {
        return opamp_evaluate(cfg_, space_, a);
    } catch (const EvalError&) {
        return std::nullopt;  // failure sample
    }
}

std::unique_ptr<Evaluator> make_env(Phase phase, OpAmpModelConfig cfg,
                                    const ParameterSpace& space) {
    if (phase == Phase::Schematic) {
        cfg.c_par = 0.0;
    } else if (cfg.c_par <= 0.0) {
        cfg.c_par = kDefaultPostLayoutCPar;
    }
    return std::make_unique<OpAmpEvaluator>(cfg, space);
}

}  // namespace dynaopt
