#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smclab/model.hpp"

namespace smclab {

struct BetaTableConfig {
    std::string function = "beta0";  // beta0 | beta1 | phi0 | phik
    std::size_t points = 21;
    double y2 = 0.2;
    double y3 = 0.3;
};

struct ExperimentConfig {
    int schema = 1;
    std::string experiment;
    std::string model = "exp-uniform";
    std::optional<Model::ExpPolySpec> custom_model;
    std::uint64_t seed = 20240601;
    std::size_t particles = 2000;
    std::size_t replicates = 100000;   // n1
    std::size_t replicates2 = 10000;   // n2
    int step = 1;
    std::size_t tuple = 1;
    std::size_t workers = 1;
    double level = 0.95;
    bool timing = true;
    std::string format = "csv";
    std::optional<std::string> out;
    BetaTableConfig beta_table;
};

const std::vector<std::string>& experiment_names();

// Desk-scale defaults for the named experiment.
ExperimentConfig default_config(const std::string& experiment);

// Applies the fields present in j on top of base. Unknown fields, a missing or
// wrong schema version and ill-typed values raise InvalidConfig.
ExperimentConfig apply_config(ExperimentConfig base, const nlohmann::json& j);

ExperimentConfig load_config(const std::string& path, const std::string& experiment);

void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

Model build_model(const ExperimentConfig& cfg);

}  // namespace smclab
