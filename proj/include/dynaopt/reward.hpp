#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dynaopt {

// Named bound(s) on one metric. `objective` switches that metric to the
// unclipped variant (no min(.,0)), so exceeding the bound earns credit;
// unused by the default benchmark.
struct ConstraintSpec {
    std::string metric;
    std::optional<double> lower;  // m_LOW
    std::optional<double> upper;  // m_UP
    double weight = 1.0;          // w_i
    std::string unit;
    bool objective = false;
};

using MetricVector = std::map<std::string, double>;

struct RewardValue {
    double total = 0.0;                       // R = sum of w_i * r_i
    std::map<std::string, double> per_metric;  // unweighted r_i
};

// Throws ConfigError on structural problems (no bound, lower >= upper,
// non-positive weight or bound).
void validate_constraints(const std::vector<ConstraintSpec>& constraints);

// Normalized clipped scoring:
//   r_i = min((m - m_LOW)/(m + m_LOW), 0) + min((m_UP - m)/(m_UP + m), 0)
// absent bounds contribute 0. Missing metric -> ConfigError; negative or
// non-finite metric -> EvalError (the env layer decides the failure policy).
RewardValue score(const std::vector<ConstraintSpec>& constraints, const MetricVector& metrics);

// Worst possible total: -sum of weights (= -K with unit weights).
double worst_reward(const std::vector<ConstraintSpec>& constraints);

// gain > 200 V/V, ugbw > 1e6 Hz, phase_margin > 60 deg, ibias < 10e-3 A.
std::vector<ConstraintSpec> default_constraints();

}  // namespace dynaopt
