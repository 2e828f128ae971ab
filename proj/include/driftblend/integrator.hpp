#pragma once

#include <stdexcept>

#include "driftblend/batch.hpp"
#include "driftblend/drift.hpp"
#include "driftblend/rng.hpp"
#include "driftblend/schedule.hpp"

namespace dblend {

/// Raised when a drift evaluation produces a non-finite value; the message
/// names the offending (x, t).
class IntegrationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Map a batch at t = 0 through the forward process to time t:
/// x_t = sqrt(ab) x_0 + sqrt(1 - ab) eps with ab = alpha_bar(t).
SampleBatch forward_perturb(const SampleBatch& x0, double t, const NoiseSchedule& schedule,
                            RandomSource& rng);

/// Integrate the reverse SDE from x_{t_N} ~ N(0, I) down the grid with the
/// Euler-Maruyama update x_{t_{k-1}} = x_{t_k} - f dt_k + sqrt(beta(t_k) dt_k) z.
/// Each trajectory draws from its own substream of `base`, so results are
/// independent of threading and bit-reproducible for a fixed (config, seed).
SampleBatch euler_maruyama_reverse(const DriftModel& drift, const NoiseSchedule& schedule,
                                   const TimeGrid& grid, const RandomSource& base, int batch_size,
                                   int dim);

/// Advance one state in place from knot index k_hi down `steps` grid steps,
/// drawing noise from `rng`. Shared by the particle-search baselines; uses
/// the same update rule as euler_maruyama_reverse.
void euler_steps_inplace(const DriftModel& drift, const NoiseSchedule& schedule,
                         const TimeGrid& grid, RandomSource& rng, std::span<double> x, int k_hi,
                         int steps);

}  // namespace dblend
