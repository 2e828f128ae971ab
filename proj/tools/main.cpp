#include <CLI11.hpp>
#include <iostream>

#include "config.hpp"
#include "runner.hpp"

using namespace dblend::cli;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    int64_t seed = -1;
    int steps = 0;
    int samples = 0;
    std::string out_dir;
    bool no_plots = false;
    int workers = 0;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("config", opts.config_path, "experiment config (TOML)")->required();
    sub->add_option("--seed", opts.seed, "replace the config seed list with this single seed");
    sub->add_option("--steps", opts.steps, "override run.steps");
    sub->add_option("--samples", opts.samples, "override run.samples");
    sub->add_option("--out-dir", opts.out_dir, "output directory");
    sub->add_flag("--no-plots", opts.no_plots, "skip SVG plot output");
    sub->add_option("--workers", opts.workers, "worker thread count (0 = auto)");
    sub->add_option("--override", opts.overrides,
                    "config override key=value (dotted keys; bare keys go under [run])")
        ->take_all();
}

ExperimentConfig load(const CommonOpts& opts) {
    std::vector<std::string> overrides = opts.overrides;
    if (opts.seed >= 0) overrides.push_back("run.seeds=[" + std::to_string(opts.seed) + "]");
    if (opts.steps > 0) overrides.push_back("run.steps=" + std::to_string(opts.steps));
    if (opts.samples > 0) overrides.push_back("run.samples=" + std::to_string(opts.samples));
    if (!opts.out_dir.empty()) overrides.push_back("run.out_dir=\"" + opts.out_dir + "\"");
    if (opts.no_plots) overrides.push_back("run.plots=false");
    if (opts.workers > 0) overrides.push_back("sampler.workers=" + std::to_string(opts.workers));
    return load_config(opts.config_path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driftblend: drift blending experiments on closed-form mixture diffusion models"};
    app.require_subcommand(1);

    CommonOpts opts;
    CLI::App* pareto = app.add_subcommand("pareto", "multi-reward preference sweep");
    CLI::App* kla = app.add_subcommand("kla", "KL-strength lambda sweep");
    CLI::App* jensen = app.add_subcommand("jensen", "approximation-gap bound report");
    CLI::App* sample = app.add_subcommand("sample", "raw terminal samples to CSV");
    CLI::App* fit = app.add_subcommand("fit", "train and serialize score models");
    CLI::App* validate = app.add_subcommand("validate", "invariant suite on the configured models");
    for (CLI::App* sub : {pareto, kla, jensen, sample, fit, validate}) add_common(sub, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const ExperimentConfig cfg = load(opts);
        RunRecord rec;
        if (pareto->parsed())
            rec = run_pareto(cfg);
        else if (kla->parsed())
            rec = run_kla_sweep(cfg);
        else if (jensen->parsed())
            rec = run_jensen_report(cfg);
        else if (sample->parsed())
            rec = run_sample(cfg);
        else if (fit->parsed())
            rec = run_fit(cfg);
        else
            rec = run_validate(cfg);
        std::cout << rec.subcommand << ": wrote " << rec.rows_written << " rows to " << cfg.out_dir
                  << " (config " << rec.config_hash << ")\n";
        for (const std::string& w : rec.warnings) std::cout << "note: " << w << "\n";
        return rec.ok ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
