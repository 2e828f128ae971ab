#pragma once

#include <string>
#include <vector>

#include "driftblend/batch.hpp"
#include "driftblend/drift.hpp"
#include "driftblend/gaussian_mixture.hpp"
#include "driftblend/linalg.hpp"
#include "driftblend/rewards.hpp"
#include "driftblend/rng.hpp"
#include "driftblend/schedule.hpp"

namespace dblend {

enum class FeatureFamily { Polynomial, RadialBasis };
enum class DsmWeighting { Uniform, OneMinusAlphaBar };

/// Parametric score model s_theta(x, t): a fixed feature map per point and
/// one coefficient matrix per time bin (nearest-bin lookup at the edges).
class ScoreModel {
  public:
    /// Polynomial family: all monomials of total degree <= degree.
    static ScoreModel polynomial(int dim, int degree, int time_bins, double horizon);
    /// Radial-basis family: unit-height Gaussian bumps at `centers`.
    static ScoreModel radial_basis(std::vector<Vec> centers, double bandwidth, int time_bins,
                                   double horizon);

    FeatureFamily family() const { return family_; }
    int dim() const { return dim_; }
    int degree() const { return degree_; }
    int time_bins() const { return static_cast<int>(theta_.size()); }
    double horizon() const { return horizon_; }
    double bandwidth() const { return bandwidth_; }
    const std::vector<Vec>& centers() const { return centers_; }
    int feature_count() const;
    const Mat& coefficients(int bin) const { return theta_[bin]; }
    Mat& coefficients(int bin) { return theta_[bin]; }

    bool same_architecture(const ScoreModel& other) const;

    void features(std::span<const double> x, std::span<double> phi) const;
    int bin_of(double t) const;
    Vec evaluate(std::span<const double> x, double t) const;
    void evaluate_batch(std::span<const double> xs, double t, std::span<double> out) const;

  private:
    ScoreModel() = default;
    FeatureFamily family_ = FeatureFamily::Polynomial;
    int dim_ = 1;
    int degree_ = 1;
    std::vector<Vec> centers_;
    double bandwidth_ = 1.0;
    double horizon_ = 1.0;
    std::vector<Mat> theta_;  // per bin, feature_count x dim
    std::vector<std::vector<int>> monomials_;  // exponent tuples for polynomial family

    void init_theta();
};

struct TrainConfig {
    int num_samples = 50000;  // training pairs drawn from the data batch (with replacement)
    int time_bins = 32;
    double ridge = 1e-6;
    DsmWeighting weighting = DsmWeighting::OneMinusAlphaBar;
};

struct TrainReport {
    double objective = 0.0;  // weighted mean squared denoising residual
    int ridge_bumps = 0;     // bins where the normal equations needed a larger ridge
    std::vector<std::string> warnings;
};

/// Denoising score matching: regress s_theta(x_t, t) onto
/// -(x_t - sqrt(ab) x_0) / (1 - ab) with per-bin ridge least squares solved
/// in closed form. Deterministic given (data, config, rng).
TrainReport dsm_train(ScoreModel& model, const SampleBatch& data, const NoiseSchedule& schedule,
                      const TrainConfig& config, RandomSource rng);

/// p_t-mass-weighted mean squared error against the analytic score of
/// `truth`, averaged over a time grid (1D/2D quadrature).
double score_mse(const ScoreModel& model, const GaussianMixture& truth,
                 const NoiseSchedule& schedule, const std::vector<double>& ts);

/// Parameter-wise convex combination; models must share the architecture.
ScoreModel average_params(std::span<const ScoreModel> models, const PreferenceWeights& w);

/// Wrap a fitted model as a reverse drift (tag "learned(...)").
DriftPtr drift_from_model(ScoreModel model, NoiseSchedule schedule, std::string tag = "learned");

}  // namespace dblend
