#include "dynaopt/reward.hpp"

#include <cmath>
#include <set>

#include "dynaopt/errors.hpp"

namespace dynaopt {

void validate_constraints(const std::vector<ConstraintSpec>& constraints) {
    if (constraints.empty()) {
        throw ConfigError("constraints: at least one constraint is required");
    }
    std::set<std::string> seen;
    for (const ConstraintSpec& c : constraints) {
        if (c.metric.empty()) throw ConfigError("constraints: empty metric name");
        if (!seen.insert(c.metric).second) {
            throw ConfigError("constraint '" + c.metric + "': duplicate metric");
        }
        if (!c.lower && !c.upper) {
            throw ConfigError("constraint '" + c.metric + "': needs a lower or upper bound");
        }
        for (const auto& bound : {c.lower, c.upper}) {
            if (bound && (!std::isfinite(*bound) || *bound <= 0.0)) {
                throw ConfigError("constraint '" + c.metric + "': bounds must be positive");
            }
        }
        if (c.lower && c.upper && !(*c.lower < *c.upper)) {
            throw ConfigError("constraint '" + c.metric + "': lower must be < upper");
        }
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw ConfigError("constraint '" + c.metric + "': weight must be positive");
        }
    }
}

RewardValue score(const std::vector<ConstraintSpec>& constraints, const MetricVector& metrics) {
    RewardValue out;
    for (const ConstraintSpec& c : constraints) {
        const auto it = metrics.find(c.metric);
        if (it == metrics.end()) {
            throw ConfigError("score: metric '" + c.metric + "' missing from measurement");
        }
        const double m = it->second;
        if (!std::isfinite(m)) {
            throw EvalError("score: metric '" + c.metric + "' is not finite");
        }
        if (m < 0.0) {
            throw EvalError("score: metric '" + c.metric + "' is negative");
        }
        double r = 0.0;
        if (c.lower) {
            const double term = (m - *c.lower) / (m + *c.lower);
            r += c.objective ? term : std::min(term, 0.0);
        }
        if (c.upper) {
            const double term = (*c.upper - m) / (*c.upper + m);
            r += c.objective ? term : std::min(term, 0.0);
        }
        out.per_metric[c.metric] = r;
        out.total += c.weight * r;
    }
    return out;
}

double worst_reward(const std::vector<ConstraintSpec>& constraints) {
    double k = 0.0;
    for (const ConstraintSpec& c : constraints) k += c.weight;
    return -k;
}

std::vector<ConstraintSpec> default_constraints() {
    std::vector<ConstraintSpec> out;
    out.push_back({"gain", 200.0, std::nullopt, 1.0, "V/V", false});
    out.push_back({"ugbw", 1e6, std::nullopt, 1.0, "Hz", false});
    out.push_back({"phase_margin", 60.0, std::nullopt, 1.0, "deg", false});
    out.push_back({"ibias", std::nullopt, 10e-3, 1.0, "A", false});
    return out;
}

}  // namespace dynaopt
