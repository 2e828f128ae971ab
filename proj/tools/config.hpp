#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "driftblend/baselines.hpp"
#include "driftblend/gaussian_mixture.hpp"
#include "driftblend/rewards.hpp"
#include "driftblend/schedule.hpp"
#include "driftblend/score_fit.hpp"

namespace dblend::cli {

using json = nlohmann::json;

/// Configuration / usage problems; the CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RsTraining {
    int train_samples = 20000;
    int time_bins = 16;
    double ridge = 1e-4;
    double bandwidth = 1.3;
    int centers_per_axis = 6;
    double centers_halfwidth = 4.0;
};

struct JensenGrid {
    std::vector<double> x_grid{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> t_grid{0.5, 0.35, 0.25, 0.1, 0.05};
    int l1_draws = 4096;
    int l2_draws = 8192;
};

struct ExperimentConfig {
    json raw;  // post-override source of truth; hashed for provenance

    GaussianMixture prior = GaussianMixture::standard(1);
    std::vector<RewardSpec> rewards;
    double alpha = 1.0;
    NoiseSchedule schedule;
    int steps = 1000;
    std::string grid_kind = "uniform";
    double grid_gamma = 2.0;
    int samples = 50000;
    std::vector<std::string> methods{"pretrained"};
    std::vector<double> w_grid;
    std::vector<std::vector<double>> w_vectors;  // explicit weights when > 2 rewards
    std::vector<double> lambda_grid;
    std::vector<uint64_t> seeds{1};
    std::string out_dir = "out";
    bool plots = true;

    double lambda_max = 4.0;
    bool allow_large_lambda = false;
    double blend_gate_t = -1.0;  // < 0: blend at every step

    RggConfig rgg;
    CodeConfig code;
    RsTraining rs;
    JensenGrid jensen;

    int kl_trajectories = 2000;
    int workers = 0;  // 0 = auto
    int best_of_n_n = 64;
    std::string sample_method = "pretrained";

    TimeGrid make_grid() const;
    PreferenceWeights weights_at(size_t index) const;
    size_t sweep_size() const { return w_vectors.empty() ? w_grid.size() : w_vectors.size(); }
};

/// Apply one --override entry ("dotted.key=value"); bare keys fall into
/// the [run] table. Values are parsed as TOML scalars.
void apply_override(json& raw, const std::string& entry);

ExperimentConfig interpret_config(json raw);
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

std::string canonical_dump(const json& j);
std::string config_hash(const json& j);  // 16-hex-digit FNV-1a of the canonical dump

}  // namespace dblend::cli
