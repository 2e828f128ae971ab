#pragma once

#include <span>
#include <vector>

#include "driftblend/linalg.hpp"
#include "driftblend/rng.hpp"
#include "driftblend/schedule.hpp"

namespace dblend {

/// Finite Gaussian mixture with everywhere-positive density. Weights are
/// validated to the simplex and covariances to symmetric positive definite
/// (Cholesky succeeds) at construction; instances are immutable afterwards,
/// so concurrent evaluation is safe.
class GaussianMixture {
  public:
    GaussianMixture(std::vector<double> weights, std::vector<Vec> means, std::vector<Mat> covariances);

    static GaussianMixture single(Vec mean, Mat covariance);
    /// Standard normal N(0, I) in `dim` dimensions.
    static GaussianMixture standard(int dim);

    int dim() const { return dim_; }
    int components() const { return static_cast<int>(weights_.size()); }
    const std::vector<double>& weights() const { return weights_; }
    double log_weight(int k) const { return log_weights_[k]; }
    const Vec& mean(int k) const { return means_[k]; }
    const Mat& covariance(int k) const { return covs_[k]; }
    const Mat& covariance_cholesky(int k) const { return chols_[k]; }

    double log_density(std::span<const double> x) const;
    double density(std::span<const double> x) const;

    /// grad_x log p(x); responsibilities are formed in log space with
    /// max-subtraction, so widely separated components stay stable.
    Vec score(std::span<const double> x) const;
    void score_batch(std::span<const double> xs, std::span<double> out) const;

    /// log responsibilities log(w_k N_k(x) / p(x)); out has `components()` entries.
    void log_responsibilities(std::span<const double> x, std::span<double> out) const;

    Vec mixture_mean() const;
    Mat mixture_covariance() const;

    int sample_component(RandomSource& rng) const;
    void sample(RandomSource& rng, std::span<double> out) const;
    Vec sample(RandomSource& rng) const;

    /// Mixture CDF; 1D models only.
    double cdf_1d(double x) const;

  private:
    int dim_ = 0;
    std::vector<double> weights_;
    std::vector<double> log_weights_;
    std::vector<Vec> means_;
    std::vector<Mat> covs_;
    std::vector<Mat> chols_;
    std::vector<double> log_norms_;  // -d/2 log(2pi) - 1/2 logdet(cov)

    double component_log_density(int k, std::span<const double> x, std::span<double> scratch) const;
};

/// Marginal law of the forward process at time t: component k maps to
/// N(sqrt(ab) mu_k, ab Sigma_k + (1 - ab) I) with ab = alpha_bar(t);
/// weights are unchanged.
GaussianMixture marginal_at(const GaussianMixture& prior, const NoiseSchedule& schedule, double t);

/// Conditional law of x_0 given x_t = sqrt(ab) x_0 + sqrt(1-ab) eps, as a
/// mixture over component posteriors with responsibilities taken from the
/// component marginal densities at x_t. Rejects t = 0 (Dirac limit).
GaussianMixture posterior_x0_given_xt(const GaussianMixture& prior, const NoiseSchedule& schedule,
                                      double t, std::span<const double> x_t);

}  // namespace dblend
