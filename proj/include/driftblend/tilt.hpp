#pragma once

#include <span>
#include <stdexcept>

#include "driftblend/gaussian_mixture.hpp"
#include "driftblend/rewards.hpp"

namespace dblend {

/// Raised when a quadratic tilt destroys positive definiteness of a
/// component precision (the exponent exp(r/alpha) outgrows the Gaussian
/// tails, so the tilted measure is not normalizable).
class TiltDivergenceError : public std::domain_error {
  public:
    TiltDivergenceError(int component, double alpha);
    int component() const { return component_; }

  private:
    int component_;
};

struct TiltResult {
    GaussianMixture tilted;
    double log_normalizer;  // log Z of prior(x) exp(r(x)/alpha) / Z
};

/// Exponential tilt by a linear reward r(x) = a.x + b: component means
/// shift by Sigma_k a / alpha, covariances are unchanged, and weights are
/// reweighted by exp(a.mu_k/alpha + a.Sigma_k a / (2 alpha^2)) in log space.
TiltResult tilt_linear(const GaussianMixture& prior, std::span<const double> a, double b, double alpha);

/// Exponential tilt by r(x) = x.A x + a.x + b (A symmetric): component
/// precisions become Sigma_k^{-1} - 2A/alpha (must stay PD), means follow
/// the completed square, weights pick up the Gaussian-normalizer ratio.
TiltResult tilt_quadratic(const GaussianMixture& prior, const Mat& A, std::span<const double> a,
                          double b, double alpha);

/// Dispatch on the reward variant; blackbox rewards have no closed-form
/// tilt and are rejected.
TiltResult tilt_reward(const GaussianMixture& prior, const RewardSpec& reward, double alpha);

}  // namespace dblend
