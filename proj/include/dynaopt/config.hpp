#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dynaopt/env.hpp"
#include "dynaopt/external_sim.hpp"
#include "dynaopt/json_io.hpp"
#include "dynaopt/param_space.hpp"
#include "dynaopt/reward.hpp"
#include "dynaopt/trainer.hpp"

namespace dynaopt {

enum class EnvKind { Schematic, PostLayout, External };

std::string env_kind_name(EnvKind k);
EnvKind env_kind_from_name(const std::string& name);

// Checkpoints consumed by transfer mode (both required there).
struct TransferConfig {
    std::string policy_checkpoint;
    std::string buffer_path;
};

// Checkpoints consumed by model_based mode; the policy one is optional
// (fresh policy when empty).
struct ModelBasedConfig {
    std::string model_checkpoint;
    std::string policy_checkpoint;
};

// One self-contained experiment: space, constraints, env, trainer, output.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "dynaopt_out";
    EnvKind env_kind = EnvKind::Schematic;
    OpAmpModelConfig model;
    ExternalSimConfig external;
    ParameterSpace space = default_opamp_space();
    std::vector<ConstraintSpec> constraints = default_constraints();
    TrainerConfig trainer;  // trainer.mode selects the algorithm
    TransferConfig transfer;
    ModelBasedConfig model_based;
};

// Strict parse: unknown keys are rejected, every problem is reported with
// its dotted path, and all of them arrive in one ConfigError.
ExperimentConfig parse_experiment_config(const ordered_json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Resolved config back to JSON (defaults filled in), for echoing into the
// output directory.
ordered_json experiment_config_to_json(const ExperimentConfig& cfg);

}  // namespace dynaopt
