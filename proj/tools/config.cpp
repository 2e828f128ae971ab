#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "driftblend/json_io.hpp"
#include "toml_subset.hpp"

namespace dblend::cli {

namespace {

const std::set<std::string> kKnownMethods = {"pretrained", "morl_oracle", "db_mpa",  "db_kla",
                                             "rs_learned", "rgg",         "code",    "best_of_n"};

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

}  // namespace

TimeGrid ExperimentConfig::make_grid() const {
    if (grid_kind == "uniform") return TimeGrid::uniform(steps, schedule.horizon);
    if (grid_kind == "geometric") return TimeGrid::geometric(steps, schedule.horizon, grid_gamma);
    throw ConfigError("grid.kind must be 'uniform' or 'geometric', got '" + grid_kind + "'");
}

PreferenceWeights ExperimentConfig::weights_at(size_t index) const {
    if (!w_vectors.empty()) return PreferenceWeights(w_vectors.at(index));
    const double w = w_grid.at(index);
    if (rewards.size() != 2)
        throw ConfigError("scalar w grid requires exactly 2 rewards; use run.w_vectors otherwise");
    return PreferenceWeights({w, 1.0 - w});
}

void apply_override(json& raw, const std::string& entry) {
    const size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--override expects key=value, got '" + entry + "'");
    std::string key = entry.substr(0, eq);
    const std::string value_text = entry.substr(eq + 1);
    if (key.find('.') == std::string::npos) key = "run." + key;

    // reuse the TOML value grammar for the right-hand side
    json parsed = parse_toml("v = " + value_text);
    json value = parsed.at("v");

    json* node = &raw;
    size_t start = 0;
    while (true) {
        const size_t dot = key.find('.', start);
        const std::string seg = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (seg.empty()) throw ConfigError("--override: empty key segment in '" + entry + "'");
        if (dot == std::string::npos) {
            (*node)[seg] = std::move(value);
            break;
        }
        node = &(*node)[seg];
        if (node->is_null()) *node = json::object();
        if (!node->is_object()) throw ConfigError("--override: '" + seg + "' is not a table");
        start = dot + 1;
    }
}

ExperimentConfig interpret_config(json raw) {
    ExperimentConfig cfg;
    try {
        // prior: inline tables or a JSON file reference
        if (!raw.contains("prior")) throw ConfigError("missing [prior] section");
        const json& pj = raw.at("prior");
        if (pj.contains("file")) {
            std::ifstream in(pj.at("file").get<std::string>());
            if (!in) throw ConfigError("cannot open prior file " + pj.at("file").get<std::string>());
            json file_json;
            in >> file_json;
            cfg.prior = mixture_from_json(file_json);
        } else {
            cfg.prior = mixture_from_json(pj);
        }

        if (raw.contains("rewards")) {
            for (const json& rj : raw.at("rewards")) {
                if (rj.contains("file")) {
                    std::ifstream in(rj.at("file").get<std::string>());
                    if (!in)
                        throw ConfigError("cannot open reward file " +
                                          rj.at("file").get<std::string>());
                    json file_json;
                    in >> file_json;
                    cfg.rewards.push_back(reward_from_json(file_json));
                } else {
                    cfg.rewards.push_back(reward_from_json(rj));
                }
            }
        }
        for (const RewardSpec& r : cfg.rewards)
            if (r.dim() != cfg.prior.dim())
                throw ConfigError("reward dimension " + std::to_string(r.dim()) +
                                  " differs from prior dimension " + std::to_string(cfg.prior.dim()));

        const json run = raw.value("run", json::object());
        cfg.alpha = get_or(run, "alpha", 1.0);
        if (!(cfg.alpha > 0.0))
            throw ConfigError("run.alpha must be > 0 (the KL regularization weight); got " +
                              std::to_string(cfg.alpha));
        cfg.steps = get_or(run, "steps", 1000);
        cfg.samples = get_or(run, "samples", 50000);
        if (cfg.steps < 1) throw ConfigError("run.steps must be >= 1");
        if (cfg.samples < 1) throw ConfigError("run.samples must be >= 1");
        cfg.methods = get_or(run, "methods", cfg.methods);
        for (const std::string& m : cfg.methods)
            if (!kKnownMethods.count(m)) throw ConfigError("unknown method '" + m + "'");
        cfg.w_grid = get_or(run, "w_grid", cfg.w_grid);
        for (double w : cfg.w_grid)
            if (w < 0.0 || w > 1.0) throw ConfigError("run.w_grid entries must lie in [0, 1]");
        if (run.contains("w_vectors"))
            cfg.w_vectors = run.at("w_vectors").get<std::vector<std::vector<double>>>();
        cfg.lambda_grid = get_or(run, "lambda_grid", cfg.lambda_grid);
        if (run.contains("seeds")) {
            cfg.seeds.clear();
            for (const json& s : run.at("seeds")) cfg.seeds.push_back(s.get<uint64_t>());
        }
        if (cfg.seeds.empty()) throw ConfigError("run.seeds must not be empty");
        if (run.contains("out_dir")) {
            cfg.out_dir = run.at("out_dir").get<std::string>();
        } else if (const char* env = std::getenv("DRIFTBLEND_OUT_DIR")) {
            cfg.out_dir = env;
        }
        cfg.plots = get_or(run, "plots", true);

        const json sj = raw.value("schedule", json::object());
        cfg.schedule = NoiseSchedule(get_or(sj, "beta_min", 0.1), get_or(sj, "beta_max", 20.0),
                                     get_or(sj, "horizon", 1.0));

        const json gj = raw.value("grid", json::object());
        cfg.grid_kind = get_or<std::string>(gj, "kind", "uniform");
        cfg.grid_gamma = get_or(gj, "gamma", 2.0);
        cfg.make_grid();  // validate early

        const json bj = raw.value("blend", json::object());
        cfg.blend_gate_t = get_or(bj, "gate_t", -1.0);
        cfg.lambda_max = get_or(bj, "lambda_max", 4.0);
        cfg.allow_large_lambda = get_or(bj, "allow_large_lambda", false);
        for (double lam : cfg.lambda_grid) {
            if (lam < 0.0) throw ConfigError("run.lambda_grid entries must be >= 0");
            if (lam > cfg.lambda_max && !cfg.allow_large_lambda)
                throw ConfigError("lambda " + std::to_string(lam) + " exceeds blend.lambda_max=" +
                                  std::to_string(cfg.lambda_max) +
                                  " (set blend.allow_large_lambda=true to override)");
        }

        const json rj = raw.value("rgg", json::object());
        cfg.rgg.gamma = get_or(rj, "gamma", 0.024);
        cfg.rgg.normalize_gradients = get_or(rj, "normalize", true);
        cfg.rgg.alpha = get_or(rj, "alpha", cfg.alpha);
        cfg.rgg.reverse_indexing = get_or(rj, "reverse_indexing", false);
        cfg.rgg.validate();

        const json cj = raw.value("code", json::object());
        cfg.code.particles = get_or(cj, "particles", 20);
        cfg.code.block_len = get_or(cj, "block_len", 5);
        cfg.code.validate();
        if (cfg.steps % cfg.code.block_len != 0 &&
            std::count(cfg.methods.begin(), cfg.methods.end(), "code"))
            throw ConfigError("code.block_len must divide run.steps");

        const json rsj = raw.value("rs", json::object());
        cfg.rs.train_samples = get_or(rsj, "train_samples", cfg.rs.train_samples);
        cfg.rs.time_bins = get_or(rsj, "time_bins", cfg.rs.time_bins);
        cfg.rs.ridge = get_or(rsj, "ridge", cfg.rs.ridge);
        cfg.rs.bandwidth = get_or(rsj, "bandwidth", cfg.rs.bandwidth);
        cfg.rs.centers_per_axis = get_or(rsj, "centers_per_axis", cfg.rs.centers_per_axis);
        cfg.rs.centers_halfwidth = get_or(rsj, "centers_halfwidth", cfg.rs.centers_halfwidth);
        if (cfg.rs.train_samples < 1 || cfg.rs.time_bins < 1 || !(cfg.rs.ridge > 0.0) ||
            !(cfg.rs.bandwidth > 0.0) || cfg.rs.centers_per_axis < 1)
            throw ConfigError("[rs] training parameters must be positive");

        const json jj = raw.value("jensen", json::object());
        cfg.jensen.x_grid = get_or(jj, "x_grid", cfg.jensen.x_grid);
        cfg.jensen.t_grid = get_or(jj, "t_grid", cfg.jensen.t_grid);
        cfg.jensen.l1_draws = get_or(jj, "l1_draws", cfg.jensen.l1_draws);
        cfg.jensen.l2_draws = get_or(jj, "l2_draws", cfg.jensen.l2_draws);

        const json smp = raw.value("sampler", json::object());
        cfg.kl_trajectories = get_or(smp, "kl_trajectories", cfg.kl_trajectories);
        cfg.workers = get_or(smp, "workers", 0);

        const json bon = raw.value("best_of_n", json::object());
        cfg.best_of_n_n = get_or(bon, "n", 64);

        const json samp = raw.value("sample", json::object());
        cfg.sample_method = get_or<std::string>(samp, "method", cfg.methods.front());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    cfg.raw = std::move(raw);
    return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json raw;
    try {
        raw = parse_toml_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    for (const std::string& o : overrides) apply_override(raw, o);
    return interpret_config(std::move(raw));
}

std::string canonical_dump(const json& j) { return j.dump(); }

std::string config_hash(const json& j) {
    const std::string text = canonical_dump(j);
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dblend::cli
