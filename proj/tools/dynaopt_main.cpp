#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dynaopt/errors.hpp"
#include "dynaopt/experiment.hpp"

namespace {

struct SharedFlags {
    std::uint64_t seed = 0;
    std::string mode;
    std::string out;
    int eval_samples = 0;
    bool overwrite = false;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* mode_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* eval_opt = nullptr;

    void attach(CLI::App* cmd, bool with_mode) {
        seed_opt = cmd->add_option("--seed", seed, "Override the config seed");
        if (with_mode) {
            mode_opt = cmd->add_option(
                "--mode", mode, "Override the trainer mode (model_free|model_based|dyna|transfer)");
        }
        out_opt = cmd->add_option("--out", out, "Override the output directory/file");
        eval_opt = cmd->add_option("--eval-samples", eval_samples,
                                   "Override the final evaluation sample count");
        cmd->add_flag("--overwrite", overwrite, "Replace existing output files");
    }

    dynaopt::CliOverrides overrides() const {
        dynaopt::CliOverrides o;
        if (seed_opt && seed_opt->count()) o.seed = seed;
        if (mode_opt && mode_opt->count()) o.mode = mode;
        if (out_opt && out_opt->count()) o.out = out;
        if (eval_opt && eval_opt->count()) o.eval_samples = eval_samples;
        o.overwrite = overwrite;
        return o;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynaopt: REINFORCE with a learned reward model for constrained parametric design"};
    app.require_subcommand(1);

    std::string run_config;
    SharedFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "Train per the config and write run artifacts");
    run->add_option("--config", run_config, "Experiment config (JSON)")->required();
    run_flags.attach(run, true);

    std::string eval_policy;
    std::string eval_config;
    SharedFlags eval_flags;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy checkpoint on the config's env");
    eval->add_option("policy", eval_policy, "Policy checkpoint (JSON)")->required();
    eval->add_option("--config", eval_config, "Experiment config (JSON)")->required();
    eval_flags.attach(eval, false);

    std::string export_runlog;
    std::string export_what;
    SharedFlags export_flags;
    CLI::App* exp = app.add_subcommand("export", "Export figure data from a runlog");
    exp->add_option("runlog", export_runlog, "runlog.csv from a run")->required();
    exp->add_option("what", export_what, "mean-reward-curve | histogram")->required();
    export_flags.attach(exp, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return dynaopt::cmd_run(run_config, run_flags.overrides());
        if (eval->parsed()) return dynaopt::cmd_eval(eval_policy, eval_config, eval_flags.overrides());
        if (exp->parsed()) return dynaopt::cmd_export(export_runlog, export_what, export_flags.overrides());
    } catch (const dynaopt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dynaopt::EvalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
