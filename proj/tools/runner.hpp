#pragma once

#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace dblend::cli {

struct RunRecord {
    std::string subcommand;
    std::string config_hash;
    std::string version;
    int steps = 0;
    std::string grid_kind;
    int samples = 0;
    std::vector<std::pair<std::string, double>> method_wall_ms;
    std::vector<std::string> warnings;
    int rows_written = 0;
    bool ok = true;

    json to_json() const;
};

RunRecord run_pareto(const ExperimentConfig& cfg);
RunRecord run_kla_sweep(const ExperimentConfig& cfg);
RunRecord run_jensen_report(const ExperimentConfig& cfg);
RunRecord run_sample(const ExperimentConfig& cfg);
RunRecord run_fit(const ExperimentConfig& cfg);
RunRecord run_validate(const ExperimentConfig& cfg);

}  // namespace dblend::cli
