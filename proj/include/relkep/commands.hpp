#pragma once

#include <string>

#include "relkep/config.hpp"

namespace relkep {

// Flag overrides resolved by the CLI front end; unset members fall back to
// the config values.
struct CommandOptions {
    std::optional<std::string> out_dir;
    std::optional<double> tol;
    int jobs = 1;
};

// Each command writes its artifacts under the output directory and returns
// the process exit status: 0 when every configured assertion holds, 1 when
// an assertion fails. Config/IO problems surface as exceptions (exit 2 in
// the CLI front end).
int cmd_verify(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_nondeg(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_resonance(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_find_orbits(const ExperimentConfig& cfg, const CommandOptions& opts);
int cmd_continue(const ExperimentConfig& cfg, const CommandOptions& opts);

}  // namespace relkep
