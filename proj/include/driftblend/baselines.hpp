#pragma once

#include <atomic>
#include <functional>
#include <memory>

#include "driftblend/blend.hpp"
#include "driftblend/drift.hpp"
#include "driftblend/integrator.hpp"
#include "driftblend/rewards.hpp"

namespace dblend {

/// Reward gradient guidance configuration; lambda_k follows the exponential
/// schedule (1 + gamma)^(k-1) with k counting reverse steps from t_N
/// (reverse_indexing flips the direction).
struct RggConfig {
    double gamma = 0.024;
    bool normalize_gradients = true;
    double alpha = 1.0;
    bool reverse_indexing = false;

    void validate() const;
};

/// Block particle search: N particles, lookahead blocks of B steps.
struct CodeConfig {
    int particles = 20;
    int block_len = 5;

    void validate() const;
};

/// Per-(w, lambda) exactly aligned model, the attainable upper bound for
/// all blending methods: exact_finetuned_drift at the scalarized reward and
/// effective weight alpha/lambda. lambda = 0 returns the pre-trained drift.
DriftPtr morl_oracle(const GaussianMixture& prior, std::span<const RewardSpec> basis,
                     const PreferenceWeights& w, double alpha, double lambda,
                     const NoiseSchedule& schedule);

using ScoreFn = std::function<Vec(std::span<const double>, double)>;
ScoreFn score_fn_of(DriftPtr drift, NoiseSchedule schedule);

/// Posterior-mean reconstruction x0_hat = (x_t + (1-ab) s(x_t, t)) / sqrt(ab);
/// at t <= 0 the input is returned unchanged.
Vec tweedie_denoise(std::span<const double> x_t, double t, const ScoreFn& score,
                    const NoiseSchedule& schedule);

/// Guided drift f_base - (lambda_k beta(t)/alpha) sum_i w_i g_i with
/// g_i = grad_x r_i(x0_hat(x)), each normalized to unit length when
/// configured (zero-length gradients skip normalization and are counted in
/// zero_gradient_events).
class RggDrift final : public DriftModel {
  public:
    RggDrift(DriftPtr base, std::vector<RewardSpec> basis, PreferenceWeights w, RggConfig config,
             NoiseSchedule schedule, TimeGrid grid);

    int dim() const override { return base_->dim(); }
    double horizon() const override { return base_->horizon(); }
    const std::string& provenance() const override { return tag_; }
    void eval_batch(std::span<const double> xs, double t, std::span<double> out) const override;

    long zero_gradient_events() const { return zero_grad_events_->load(); }

  private:
    DriftPtr base_;
    std::vector<RewardSpec> basis_;
    std::vector<double> w_;
    RggConfig config_;
    NoiseSchedule schedule_;
    TimeGrid grid_;
    std::string tag_;
    std::shared_ptr<std::atomic<long>> zero_grad_events_;

    int knot_index(double t) const;
};

std::shared_ptr<const RggDrift> rgg_drift(DriftPtr base, std::vector<RewardSpec> basis,
                                          PreferenceWeights w, RggConfig config,
                                          NoiseSchedule schedule, TimeGrid grid);

/// Block-lookahead particle selection: per block, spawn N particles from the
/// current state, integrate B steps each, keep the particle whose Tweedie
/// reconstruction scores highest (ties to the lowest index), and continue
/// with the winner's noise stream. N = 1 reproduces euler_maruyama_reverse
/// draw for draw.
SampleBatch code_sample(const DriftModel& drift, const RewardSpec& reward, const CodeConfig& config,
                        const NoiseSchedule& schedule, const TimeGrid& grid,
                        const RandomSource& base, int batch_size, int dim);

/// Integrate n full trajectories and return the terminal point with the
/// highest reward (ties to the lowest index).
Vec best_of_n(const DriftModel& drift, const RewardSpec& reward, int n,
              const NoiseSchedule& schedule, const TimeGrid& grid, const RandomSource& base);

}  // namespace dblend
