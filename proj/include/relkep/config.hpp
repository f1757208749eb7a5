#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "relkep/systems.hpp"

namespace relkep {

// Admissible (H, L) grid for verify/nondeg scans; L interpolates the open
// admissible band at each H, staying `margin` away from both edges.
struct GridSpec {
    int n_H = 10;
    int n_L = 10;
    double H_min = -0.9;
    double H_max = -0.1;
    double margin = 0.1;
};

struct ExperimentConfig {
    SystemSpec system;
    PerturbationSpec perturbation;
    std::optional<double> H_star;
    std::optional<int> N;
    std::optional<int> k;
    std::optional<double> eps;
    std::optional<double> eps_max;
    int steps = 10;
    GridSpec grid;
    int n_seeds = 16;
    double tol = 1e-8;
    std::string out_dir = ".";
    std::optional<std::string> golden;
    bool emit_trajectories = false;
};

// Parses and validates; throws std::invalid_argument naming the offending
// field. The document must carry "schema": 1.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

nlohmann::json perturbation_to_json(const PerturbationSpec& U);
PerturbationSpec perturbation_from_json(const nlohmann::json& j);

}  // namespace relkep
