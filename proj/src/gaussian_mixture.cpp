#include "driftblend/gaussian_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dblend {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Forward-substitution: solve L y = b for lower-triangular L, writing into y.
void forward_solve(const Mat& L, std::span<const double> b, std::span<double> y) {
    const int n = L.rows;
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= L(i, k) * y[k];
        y[i] = s / L(i, i);
    }
}

/// Back-substitution: solve L^T x = y in place.
void backward_solve(const Mat& L, std::span<double> y) {
    const int n = L.rows;
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= L(k, i) * y[k];
        y[i] = s / L(i, i);
    }
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<Vec> means,
                                 std::vector<Mat> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covs_(std::move(covariances)) {
    const size_t K = weights_.size();
    if (K == 0) throw std::invalid_argument("GaussianMixture: no components");
    if (means_.size() != K || covs_.size() != K)
        throw std::invalid_argument("GaussianMixture: component count mismatch");
    dim_ = static_cast<int>(means_[0].size());
    if (dim_ < 1) throw std::invalid_argument("GaussianMixture: dimension must be >= 1");

    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("GaussianMixture: weights must be nonnegative and finite");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("GaussianMixture: weights sum to " + std::to_string(sum) +
                                    ", expected 1");
    for (double& w : weights_) w /= sum;

    chols_.reserve(K);
    log_norms_.reserve(K);
    log_weights_.reserve(K);
    for (size_t k = 0; k < K; ++k) {
        if (static_cast<int>(means_[k].size()) != dim_)
            throw std::invalid_argument("GaussianMixture: mean dimension mismatch in component " +
                                        std::to_string(k));
        if (covs_[k].rows != dim_ || covs_[k].cols != dim_)
            throw std::invalid_argument("GaussianMixture: covariance shape mismatch in component " +
                                        std::to_string(k));
        if (!is_symmetric(covs_[k]))
            throw std::invalid_argument("GaussianMixture: covariance not symmetric in component " +
                                        std::to_string(k));
        for (double v : means_[k])
            if (!std::isfinite(v)) throw std::invalid_argument("GaussianMixture: non-finite mean");
        Mat L = cholesky(covs_[k]);  // throws if not PD
        log_norms_.push_back(-0.5 * dim_ * kLog2Pi - 0.5 * chol_logdet(L));
        chols_.push_back(std::move(L));
        log_weights_.push_back(weights_[k] > 0.0 ? std::log(weights_[k])
                                                 : -std::numeric_limits<double>::infinity());
    }
}

GaussianMixture GaussianMixture::single(Vec mean, Mat covariance) {
    return GaussianMixture({1.0}, {std::move(mean)}, {std::move(covariance)});
}

GaussianMixture GaussianMixture::standard(int dim) {
    return single(Vec(dim, 0.0), Mat::identity(dim));
}

double GaussianMixture::component_log_density(int k, std::span<const double> x,
                                              std::span<double> scratch) const {
    const int d = dim_;
    for (int i = 0; i < d; ++i) scratch[i] = x[i] - means_[k][i];
    // quadratic form via one forward solve: ||L^{-1}(x - mu)||^2
    const Mat& L = chols_[k];
    double quad = 0.0;
    for (int i = 0; i < d; ++i) {
        double s = scratch[i];
        for (int j = 0; j < i; ++j) s -= L(i, j) * scratch[j];
        scratch[i] = s / L(i, i);
        quad += scratch[i] * scratch[i];
    }
    return log_norms_[k] - 0.5 * quad;
}

double GaussianMixture::log_density(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("GaussianMixture::log_density: dimension mismatch");
    std::vector<double> scratch(dim_);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(components());
    for (int k = 0; k < components(); ++k) {
        logs[k] = log_weights_[k] + component_log_density(k, x, scratch);
        best = std::max(best, logs[k]);
    }
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - best);
    return best + std::log(acc);
}

double GaussianMixture::density(std::span<const double> x) const { return std::exp(log_density(x)); }

void GaussianMixture::log_responsibilities(std::span<const double> x, std::span<double> out) const {
    if (static_cast<int>(out.size()) != components())
        throw std::invalid_argument("log_responsibilities: output size mismatch");
    std::vector<double> scratch(dim_);
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < components(); ++k) {
        out[k] = log_weights_[k] + component_log_density(k, x, scratch);
        best = std::max(best, out[k]);
    }
    double acc = 0.0;
    for (int k = 0; k < components(); ++k) acc += std::exp(out[k] - best);
    const double lse = best + std::log(acc);
    for (int k = 0; k < components(); ++k) out[k] -= lse;
}

Vec GaussianMixture::score(std::span<const double> x) const {
    Vec out(dim_);
    score_batch(x, out);
    return out;
}

void GaussianMixture::score_batch(std::span<const double> xs, std::span<double> out) const {
    if (xs.size() % dim_ != 0 || out.size() != xs.size())
        throw std::invalid_argument("score_batch: size mismatch");
    const size_t n = xs.size() / dim_;
    const int K = components();
    const int d = dim_;
    std::vector<double> logs(K);
    std::vector<double> sol(static_cast<size_t>(K) * d);  // per-component Sigma^{-1}(mu - x)
    std::vector<double> scratch(d);
    for (size_t i = 0; i < n; ++i) {
        std::span<const double> x = xs.subspan(i * d, d);
        std::span<double> s = out.subspan(i * d, d);
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            for (int j = 0; j < d; ++j) scratch[j] = means_[k][j] - x[j];
            std::span<double> sk(sol.data() + static_cast<size_t>(k) * d, d);
            forward_solve(chols_[k], scratch, sk);
            double quad = 0.0;
            for (int j = 0; j < d; ++j) quad += sk[j] * sk[j];
            backward_solve(chols_[k], sk);  // sk = Sigma_k^{-1} (mu_k - x)
            logs[k] = log_weights_[k] + log_norms_[k] - 0.5 * quad;
            best = std::max(best, logs[k]);
        }
        double denom = 0.0;
        for (int k = 0; k < K; ++k) {
            logs[k] = std::exp(logs[k] - best);
            denom += logs[k];
        }
        for (int j = 0; j < d; ++j) s[j] = 0.0;
        for (int k = 0; k < K; ++k) {
            const double resp = logs[k] / denom;
            const double* sk = sol.data() + static_cast<size_t>(k) * d;
            for (int j = 0; j < d; ++j) s[j] += resp * sk[j];
        }
    }
}

Vec GaussianMixture::mixture_mean() const {
    Vec m(dim_, 0.0);
    for (int k = 0; k < components(); ++k)
        for (int j = 0; j < dim_; ++j) m[j] += weights_[k] * means_[k][j];
    return m;
}

Mat GaussianMixture::mixture_covariance() const {
    const Vec m = mixture_mean();
    Mat c(dim_, dim_);
    for (int k = 0; k < components(); ++k)
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                c(i, j) += weights_[k] *
                           (covs_[k](i, j) + (means_[k][i] - m[i]) * (means_[k][j] - m[j]));
    return c;
}

int GaussianMixture::sample_component(RandomSource& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int k = 0; k < components(); ++k) {
        acc += weights_[k];
        if (u <= acc) return k;
    }
    return components() - 1;
}

void GaussianMixture::sample(RandomSource& rng, std::span<double> out) const {
    const int k = sample_component(rng);
    const Mat& L = chols_[k];
    std::vector<double> z(dim_);
    for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
    for (int i = 0; i < dim_; ++i) {
        double s = means_[k][i];
        for (int j = 0; j <= i; ++j) s += L(i, j) * z[j];
        out[i] = s;
    }
}

Vec GaussianMixture::sample(RandomSource& rng) const {
    Vec out(dim_);
    sample(rng, out);
    return out;
}

double GaussianMixture::cdf_1d(double x) const {
    if (dim_ != 1) throw std::invalid_argument("cdf_1d: model is not one-dimensional");
    double acc = 0.0;
    for (int k = 0; k < components(); ++k) {
        const double sigma = chols_[k](0, 0);
        acc += weights_[k] * 0.5 * std::erfc(-(x - means_[k][0]) / (sigma * M_SQRT2));
    }
    return acc;
}

GaussianMixture marginal_at(const GaussianMixture& prior, const NoiseSchedule& schedule, double t) {
    const double ab = alpha_bar(schedule, t);
    const double root = std::sqrt(ab);
    const int d = prior.dim();
    std::vector<Vec> means;
    std::vector<Mat> covs;
    means.reserve(prior.components());
    covs.reserve(prior.components());
    for (int k = 0; k < prior.components(); ++k) {
        Vec m = prior.mean(k);
        for (double& v : m) v *= root;
        Mat c = mat_scale(prior.covariance(k), ab);
        for (int i = 0; i < d; ++i) c(i, i) += 1.0 - ab;
        means.push_back(std::move(m));
        covs.push_back(std::move(c));
    }
    return GaussianMixture(prior.weights(), std::move(means), std::move(covs));
}

GaussianMixture posterior_x0_given_xt(const GaussianMixture& prior, const NoiseSchedule& schedule,
                                      double t, std::span<const double> x_t) {
    if (!(t > 0.0))
        throw std::domain_error("posterior_x0_given_xt: t must be > 0 (posterior at t=0 is a Dirac)");
    const double ab = alpha_bar(schedule, t);
    const double root = std::sqrt(ab);
    const double lam = ab / (1.0 - ab);  // noise precision scale
    const int d = prior.dim();
    if (static_cast<int>(x_t.size()) != d)
        throw std::invalid_argument("posterior_x0_given_xt: dimension mismatch");

    const GaussianMixture marg = marginal_at(prior, schedule, t);
    std::vector<double> log_resp(prior.components());
    marg.log_responsibilities(x_t, log_resp);

    std::vector<double> weights(prior.components());
    std::vector<Vec> means;
    std::vector<Mat> covs;
    means.reserve(prior.components());
    covs.reserve(prior.components());
    for (int k = 0; k < prior.components(); ++k) {
        weights[k] = std::exp(log_resp[k]);
        const Mat Lp = cholesky(prior.covariance(k));
        Mat precision = chol_inverse(Lp);  // Sigma_k^{-1}
        Vec h = mat_vec(precision, prior.mean(k));
        for (int i = 0; i < d; ++i) {
            precision(i, i) += lam;
            h[i] += (root / (1.0 - ab)) * x_t[i];
        }
        const Mat Lq = cholesky(precision);
        Mat post_cov = chol_inverse(Lq);
        // symmetrize against roundoff so the constructor's check passes
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < i; ++j) {
                const double v = 0.5 * (post_cov(i, j) + post_cov(j, i));
                post_cov(i, j) = post_cov(j, i) = v;
            }
        means.push_back(chol_solve(Lq, h));
        covs.push_back(std::move(post_cov));
    }
    return GaussianMixture(std::move(weights), std::move(means), std::move(covs));
}

}  // namespace dblend
