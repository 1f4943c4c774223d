#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynaopt/config.hpp"
#include "dynaopt/trainer.hpp"

namespace dynaopt {

// CLI flag overrides for top-level config scalars.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> out;
    std::optional<int> eval_samples;
    bool overwrite = false;
};

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& overrides);

// Figure raw data: reward histogram over fixed edges.
struct HistogramExport {
    std::vector<double> bin_edges;  // bins + 1, strictly increasing
    std::vector<long> counts;       // sums to n (out-of-range clamps to edge bins)
    long n = 0;
    double success_rate = 0.0;      // fraction with reward == 0
};

HistogramExport make_histogram(const std::vector<double>& rewards, int bins, double lo,
                               double hi);
void write_histogram_csv(const HistogramExport& h, const std::filesystem::path& path);

struct RunSummary {
    std::string mode;
    std::uint64_t seed = 0;
    long real_evals = 0;  // training evaluations on the real env
    int eval_samples = 0;
    double final_mean_reward = 0.0;
    double final_success_rate = 0.0;
    std::size_t buffer_size = 0;
    std::optional<long> early_stop_step;
};

ordered_json run_summary_to_json(const RunSummary& s);

// Executes cfg's mode end to end and writes config.json, runlog.csv,
// buffer.jsonl, policy.json, reward_model.json (when a model exists) and
// summary.json into cfg.output_dir. Refuses to clobber unless overwrite.
RunSummary run_experiment(const ExperimentConfig& cfg, bool overwrite);

// Subcommand bodies; exceptions propagate to main for exit-code mapping.
int cmd_run(const std::filesystem::path& config_path, const CliOverrides& overrides);
int cmd_eval(const std::filesystem::path& policy_path, const std::filesystem::path& config_path,
             const CliOverrides& overrides);
int cmd_export(const std::filesystem::path& runlog_path, const std::string& what,
               const CliOverrides& overrides);

}  // namespace dynaopt
