#include "driftblend/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dblend {

namespace {

/// Normalize log weights in place and return their log-sum-exp.
double normalize_log_weights(std::vector<double>& logw) {
    const double best = *std::max_element(logw.begin(), logw.end());
    double acc = 0.0;
    for (double v : logw) acc += std::exp(v - best);
    const double lse = best + std::log(acc);
    for (double& v : logw) v = std::exp(v - lse);  // now plain weights
    return lse;
}

}  // namespace

TiltDivergenceError::TiltDivergenceError(int component, double alpha)
    : std::domain_error("tilt diverges: component " + std::to_string(component) +
                        " loses positive definiteness at alpha=" + std::to_string(alpha) +
                        " (reward grows faster than the Gaussian tail)"),
      component_(component) {}

TiltResult tilt_linear(const GaussianMixture& prior, std::span<const double> a, double b,
                       double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("tilt_linear: alpha must be > 0");
    const int d = prior.dim();
    if (static_cast<int>(a.size()) != d) throw std::invalid_argument("tilt_linear: dimension mismatch");

    const int K = prior.components();
    std::vector<double> logw(K);
    std::vector<Vec> means;
    std::vector<Mat> covs;
    means.reserve(K);
    covs.reserve(K);
    for (int k = 0; k < K; ++k) {
        const Mat& sigma = prior.covariance(k);
        const Vec sigma_a = mat_vec(sigma, a);
        Vec mean = prior.mean(k);
        for (int i = 0; i < d; ++i) mean[i] += sigma_a[i] / alpha;
        // log E_k[exp(a.x/alpha)] = a.mu/alpha + a.Sigma a/(2 alpha^2)
        const double log_mult =
            dot(a, prior.mean(k)) / alpha + dot(a, sigma_a) / (2.0 * alpha * alpha);
        logw[k] = prior.log_weight(k) + log_mult;
        means.push_back(std::move(mean));
        covs.push_back(sigma);
    }
    const double log_z = normalize_log_weights(logw) + b / alpha;
    return TiltResult{GaussianMixture(std::move(logw), std::move(means), std::move(covs)), log_z};
}

TiltResult tilt_quadratic(const GaussianMixture& prior, const Mat& A, std::span<const double> a,
                          double b, double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("tilt_quadratic: alpha must be > 0");
    const int d = prior.dim();
    if (A.rows != d || A.cols != d || static_cast<int>(a.size()) != d)
        throw std::invalid_argument("tilt_quadratic: dimension mismatch");
    if (!is_symmetric(A)) throw std::invalid_argument("tilt_quadratic: A must be symmetric");

    const int K = prior.components();
    std::vector<double> logw(K);
    std::vector<Vec> means;
    std::vector<Mat> covs;
    means.reserve(K);
    covs.reserve(K);
    for (int k = 0; k < K; ++k) {
        const Mat Lp = cholesky(prior.covariance(k));
        const Mat prior_precision = chol_inverse(Lp);
        Mat precision = prior_precision;
        for (size_t i = 0; i < precision.a.size(); ++i) precision.a[i] -= 2.0 * A.a[i] / alpha;
        Mat Lq;
        try {
            Lq = cholesky(precision);
        } catch (const std::domain_error&) {
            throw TiltDivergenceError(k, alpha);
        }
        Vec h = mat_vec(prior_precision, prior.mean(k));
        for (int i = 0; i < d; ++i) h[i] += a[i] / alpha;
        Vec mean = chol_solve(Lq, h);
        Mat cov = chol_inverse(Lq);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < i; ++j) {
                const double v = 0.5 * (cov(i, j) + cov(j, i));
                cov(i, j) = cov(j, i) = v;
            }
        // normalizer ratio: sqrt(det Sigma~ / det Sigma) exp(h.m~/2 - mu.Sigma^{-1}mu/2)
        const double log_mult = -0.5 * chol_logdet(Lq) - 0.5 * chol_logdet(Lp) + 0.5 * dot(h, mean) -
                                0.5 * dot(prior.mean(k), mat_vec(prior_precision, prior.mean(k)));
        logw[k] = prior.log_weight(k) + log_mult;
        means.push_back(std::move(mean));
        covs.push_back(std::move(cov));
    }
    const double log_z = normalize_log_weights(logw) + b / alpha;
    return TiltResult{GaussianMixture(std::move(logw), std::move(means), std::move(covs)), log_z};
}

TiltResult tilt_reward(const GaussianMixture& prior, const RewardSpec& reward, double alpha) {
    switch (reward.kind()) {
        case RewardSpec::Kind::Linear:
            return tilt_linear(prior, reward.linear_coeff(), reward.offset(), alpha);
        case RewardSpec::Kind::Quadratic:
            return tilt_quadratic(prior, reward.quadratic_matrix(), reward.linear_coeff(),
                                  reward.offset(), alpha);
        case RewardSpec::Kind::Blackbox:
            throw std::invalid_argument("tilt_reward: blackbox rewards have no closed-form tilt");
    }
    throw std::logic_error("tilt_reward: unknown reward kind");
}

}  // namespace dblend
