#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dynaopt/env.hpp"
#include "dynaopt/param_space.hpp"

namespace dynaopt {

struct ExternalSimConfig {
    std::vector<std::string> command;  // argv prefix; gets <params> <metrics> appended
    double timeout_seconds = 60.0;
    int process_cap = 1;     // max concurrent child processes in batch calls
    bool pure = true;        // whether the backend is a pure function of the action
    std::filesystem::path work_dir = "external_calls";  // call directories live here
};

// Subprocess adapter implementing the params/metrics file protocol:
// writes `<lowercase-name> <decimal>` lines (one per parameter, in space
// order), runs `command <params-path> <metrics-path>`, and on exit 0 parses
// the metrics file in the same line format. Nonzero exit, timeout, parse
// garbage, or a missing required metric all yield a failure sample
// (nullopt); the call directory is kept for debugging in those cases and
// removed on success.
class ExternalEvaluator : public Evaluator {
public:
    ExternalEvaluator(ExternalSimConfig cfg, ParameterSpace space,
                      std::vector<std::string> required_metrics);

    std::optional<MetricVector> evaluate(const ActionVector& a) override;
    // Up to process_cap children in flight; results merged in submission order.
    std::vector<std::optional<MetricVector>> evaluate_batch(
        const std::vector<ActionVector>& actions) override;
    bool pure() const override { return cfg_.pure; }

private:
    ExternalSimConfig cfg_;
    ParameterSpace space_;
    std::vector<std::string> required_metrics_;
    long call_counter_ = 0;
};

// Exposed for tests: parse one metrics file.
std::optional<MetricVector> parse_metrics_file(const std::filesystem::path& path,
                                               const std::vector<std::string>& required);

// Exposed for tests: the exact params file content for one action.
std::string params_file_content(const ParameterSpace& space, const ActionVector& a);

}  // namespace dynaopt
