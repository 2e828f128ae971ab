#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftblend/batch.hpp"
#include "driftblend/drift.hpp"
#include "driftblend/gaussian_mixture.hpp"
#include "driftblend/rewards.hpp"
#include "driftblend/rng.hpp"
#include "driftblend/schedule.hpp"

namespace dblend {

/// Exact W1 distance between the empirical quantile functions of two 1D
/// sample sets (matched order statistics when sizes agree).
double wasserstein1_1d(std::span<const double> a, std::span<const double> b);
double wasserstein1_1d(const SampleBatch& a, const SampleBatch& b);

enum class KlMethod { Quadrature, MonteCarlo };

struct KlOptions {
    int panels = 512;          // quadrature panels (1D; 2D uses fewer per axis)
    int mc_draws = 200000;
    uint64_t seed = 0x6b31ULL;
};

/// KL(p || q) >= 0 between mixtures: grid quadrature in 1D/2D or Monte
/// Carlo over draws from p with the analytic density ratio. Negative
/// numerical residue is clamped to zero.
double kl_estimate(const GaussianMixture& p, const GaussianMixture& q, KlMethod method,
                   const KlOptions& opts = {});

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanStderr expected_reward(const SampleBatch& samples, const RewardSpec& reward);

enum class ObjectiveKl { AnalyticQuadrature, DensityRatioOnSamples };

/// Alignment objective E[r] - alpha KL(p_model || p_pre); the expectation
/// uses the samples, the KL either quadrature between the model laws or the
/// density-ratio average over the same samples.
double alignment_objective(const SampleBatch& samples, const RewardSpec& reward, double alpha,
                           const GaussianMixture& p_model, const GaussianMixture& p_pre,
                           ObjectiveKl mode = ObjectiveKl::AnalyticQuadrature);

/// Sum over steps of the Gaussian-transition KL between two drifts along
/// trajectories of drift `a`: sum_k E ||f_a - f_b||^2 dt / (2 beta). This is
/// the stepwise (path-space) divergence, an upper bound on the marginal KL,
/// with equality when `a` is the exact reverse drift of a law noised by the
/// same forward process as `b`'s.
MeanStderr stepwise_kl(const DriftModel& a, const DriftModel& b, const NoiseSchedule& schedule,
                       const TimeGrid& grid, const RandomSource& base, int batch_size);

struct ParetoPoint {
    std::string method;
    double w_or_lambda = 0.0;
    std::vector<double> reward_means;
    std::vector<double> reward_stderrs;
    double kl = 0.0;
    double objective = 0.0;
    bool objective_computed = true;
    uint64_t seed = 0;
    size_t n_samples = 0;
    std::string status = "ok";
};

/// Non-dominated subset under componentwise >= on reward means, input
/// order preserved. A point is removed only if some other point is at
/// least as good in every reward and strictly better in one.
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points);

void write_pareto_csv(std::ostream& os, const std::vector<ParetoPoint>& rows, int reward_count,
                      const std::string& sweep_column = "w");

}  // namespace dblend
