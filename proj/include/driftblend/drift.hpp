#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "driftblend/gaussian_mixture.hpp"
#include "driftblend/rewards.hpp"
#include "driftblend/schedule.hpp"
#include "driftblend/tilt.hpp"

namespace dblend {

/// Drift f(x, t) of a backward SDE dx = f dt + sigma(t) dw integrated from
/// t = T down to 0, with the convention f(x,t) = -1/2 beta(t) x - beta(t) s(x,t)
/// where s is the model's score. Implementations are immutable and safe to
/// evaluate concurrently.
class DriftModel {
  public:
    virtual ~DriftModel() = default;

    virtual int dim() const = 0;
    virtual double horizon() const = 0;
    /// Provenance tag, e.g. "pretrained", "exact_tilted(linear,alpha=1)",
    /// "db_mpa(...)". Composite tags keep the whole construction tree visible.
    virtual const std::string& provenance() const = 0;

    /// Evaluate at n points packed point-major; out has the same layout.
    virtual void eval_batch(std::span<const double> xs, double t, std::span<double> out) const = 0;

    /// The data law at t = 0 when this drift was built from a closed-form
    /// model (pre-trained or exact-tilted); null otherwise.
    virtual const GaussianMixture* data_law() const { return nullptr; }

    Vec eval(std::span<const double> x, double t) const;
};

using DriftPtr = std::shared_ptr<const DriftModel>;

/// Reverse drift of the forward process started at `prior` (the pre-trained
/// model surrogate: its marginal scores are exact).
DriftPtr pretrained_drift(GaussianMixture prior, NoiseSchedule schedule);

/// Reverse drift of the process whose data law is the exponential tilt of
/// `prior` by exp(r/alpha) -- the exact stand-in for a model fine-tuned on
/// (r, alpha). Only linear/quadratic rewards admit the closed form.
DriftPtr exact_finetuned_drift(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                               const NoiseSchedule& schedule);

/// Wrap an arbitrary score evaluator s(x, t) as a drift.
using ScoreBatchFn = std::function<void(std::span<const double>, double, std::span<double>)>;
DriftPtr drift_from_score(ScoreBatchFn score, int dim, NoiseSchedule schedule, std::string tag);

/// Recover the score implied by a drift: s(x,t) = -(f(x,t)/beta(t) + x/2).
void score_from_drift(const DriftModel& drift, const NoiseSchedule& schedule,
                      std::span<const double> xs, double t, std::span<double> out);

}  // namespace dblend
