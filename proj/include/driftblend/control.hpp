#pragma once

#include <cstdint>
#include <span>

#include "driftblend/gaussian_mixture.hpp"
#include "driftblend/rewards.hpp"
#include "driftblend/schedule.hpp"

namespace dblend {

struct ControlApproxOptions {
    int mc_draws = 4096;        // posterior draws for blackbox rewards
    uint64_t seed = 0x5eedULL;  // stream for those draws
    double fd_step_rel = 1e-4;  // central-difference step, relative
};

/// Exact control term u(x, t) = grad_x log E[exp(r(x_0)/alpha) | x_t = x]
/// for a linear reward over a Gaussian-mixture prior, computed from the
/// posterior responsibilities and per-component moment generating
/// functions (independent of the tilted-marginal code path).
Vec control_exact(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                  const NoiseSchedule& schedule, std::span<const double> x, double t);

/// Interchanged-expectation approximation
/// u_bar(x, t) = grad_x E[r(x_0)/alpha | x_t = x]: analytic for
/// linear/quadratic rewards, Monte Carlo posterior expectation with
/// reweighted common-random-number finite differences for blackbox ones.
Vec control_approx(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                   const NoiseSchedule& schedule, std::span<const double> x, double t,
                   const ControlApproxOptions& opts = {});

/// Posterior mean reward E[r(x_0)/alpha | x_t = x] (same estimator family
/// as control_approx); exposed for the gap diagnostics.
double posterior_mean_reward(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                             const NoiseSchedule& schedule, std::span<const double> x, double t,
                             const ControlApproxOptions& opts = {});

}  // namespace dblend
