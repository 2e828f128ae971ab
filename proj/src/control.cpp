#include "driftblend/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dblend {

namespace {

/// Shared per-(x, t) posterior geometry for the control-term formulas.
struct PosteriorContext {
    double ab = 0.0;
    double shift_rate = 0.0;  // sqrt(ab) / (1 - ab): d m_k / d x = shift_rate * S_k
    GaussianMixture marginal;
    GaussianMixture posterior;          // weights are the responsibilities at x
    std::vector<Vec> grad_log_comp;     // per component: V_k^{-1} (c_k - x)
    Vec resp_score;                     // sum_k resp_k grad_log_comp[k] = score of marginal
    std::vector<Vec> grad_log_resp;     // grad_log_comp[k] - resp_score

    PosteriorContext(const GaussianMixture& prior, const NoiseSchedule& schedule,
                     std::span<const double> x, double t)
        : marginal(marginal_at(prior, schedule, t)),
          posterior(posterior_x0_given_xt(prior, schedule, t, x)) {
        ab = alpha_bar(schedule, t);
        shift_rate = std::sqrt(ab) / (1.0 - ab);
        const int d = prior.dim();
        const int K = prior.components();
        grad_log_comp.resize(K);
        resp_score.assign(d, 0.0);
        Vec diff(d);
        for (int k = 0; k < K; ++k) {
            for (int i = 0; i < d; ++i) diff[i] = marginal.mean(k)[i] - x[i];
            grad_log_comp[k] = chol_solve(marginal.covariance_cholesky(k), diff);
            for (int i = 0; i < d; ++i) resp_score[i] += posterior.weights()[k] * grad_log_comp[k][i];
        }
        grad_log_resp.resize(K);
        for (int k = 0; k < K; ++k) {
            grad_log_resp[k] = grad_log_comp[k];
            for (int i = 0; i < d; ++i) grad_log_resp[k][i] -= resp_score[i];
        }
    }
};

void require_time(double t, const NoiseSchedule& schedule, const char* who) {
    if (!(t > 0.0) || t > schedule.horizon)
        throw std::domain_error(std::string(who) + ": t must lie in (0, T]");
}

}  // namespace

Vec control_exact(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                  const NoiseSchedule& schedule, std::span<const double> x, double t) {
    if (reward.kind() != RewardSpec::Kind::Linear)
        throw std::invalid_argument("control_exact: closed form requires a linear reward");
    if (!(alpha > 0.0)) throw std::domain_error("control_exact: alpha must be > 0");
    require_time(t, schedule, "control_exact");

    const PosteriorContext ctx(prior, schedule, x, t);
    const Vec& a = reward.linear_coeff();
    const int d = prior.dim();
    const int K = prior.components();

    // log resp_k + a.m_k/alpha + a.S_k a/(2 alpha^2), softmaxed
    std::vector<double> logits(K);
    std::vector<Vec> sk_a(K);
    double best = -1e300;
    for (int k = 0; k < K; ++k) {
        sk_a[k] = mat_vec(ctx.posterior.covariance(k), a);
        const double mgf_log = dot(a, ctx.posterior.mean(k)) / alpha +
                               dot(a, sk_a[k]) / (2.0 * alpha * alpha);
        logits[k] = std::log(std::max(ctx.posterior.weights()[k], 1e-300)) + mgf_log;
        best = std::max(best, logits[k]);
    }
    double denom = 0.0;
    for (int k = 0; k < K; ++k) {
        logits[k] = std::exp(logits[k] - best);
        denom += logits[k];
    }
    Vec u(d, 0.0);
    for (int k = 0; k < K; ++k) {
        const double pi_k = logits[k] / denom;
        for (int i = 0; i < d; ++i)
            u[i] += pi_k * (ctx.grad_log_resp[k][i] + ctx.shift_rate * sk_a[k][i] / alpha);
    }
    return u;
}

Vec control_approx(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                   const NoiseSchedule& schedule, std::span<const double> x, double t,
                   const ControlApproxOptions& opts) {
    if (!(alpha > 0.0)) throw std::domain_error("control_approx: alpha must be > 0");
    require_time(t, schedule, "control_approx");
    const PosteriorContext ctx(prior, schedule, x, t);
    const int d = prior.dim();
    const int K = prior.components();

    if (reward.kind() != RewardSpec::Kind::Blackbox) {
        const Vec& a = reward.linear_coeff();
        Vec u(d, 0.0);
        for (int k = 0; k < K; ++k) {
            const double resp = ctx.posterior.weights()[k];
            const Vec& mk = ctx.posterior.mean(k);
            const Mat& Sk = ctx.posterior.covariance(k);
            double value;   // r-expectation under component posterior, / alpha
            Vec grad_dir;   // gradient of that value in x
            if (reward.kind() == RewardSpec::Kind::Linear) {
                value = (dot(a, mk) + reward.offset()) / alpha;
                grad_dir = mat_vec(Sk, a);
                for (double& v : grad_dir) v *= ctx.shift_rate / alpha;
            } else {
                const Mat& A = reward.quadratic_matrix();
                const Vec Amk = mat_vec(A, mk);
                double trace = 0.0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) trace += A(i, j) * Sk(j, i);
                value = (dot(mk, Amk) + trace + dot(a, mk) + reward.offset()) / alpha;
                Vec inner(d);
                for (int i = 0; i < d; ++i) inner[i] = 2.0 * Amk[i] + a[i];
                grad_dir = mat_vec(Sk, inner);
                for (double& v : grad_dir) v *= ctx.shift_rate / alpha;
            }
            for (int i = 0; i < d; ++i)
                u[i] += resp * grad_dir[i] + ctx.grad_log_resp[k][i] * resp * value;
        }
        return u;
    }

    // Blackbox: common random numbers with responsibility reweighting so the
    // central differences see a smooth function of the probe point.
    const int n = std::max(16, opts.mc_draws);
    RandomSource rng(opts.seed, 0);
    std::vector<int> comp(n);
    std::vector<double> z(static_cast<size_t>(n) * d);
    for (int j = 0; j < n; ++j) {
        comp[j] = ctx.posterior.sample_component(rng);
        for (int i = 0; i < d; ++i) z[static_cast<size_t>(j) * d + i] = rng.normal();
    }
    std::vector<double> base_log_resp(K);
    ctx.marginal.log_responsibilities(x, base_log_resp);

    Vec probe(x.begin(), x.end());
    std::vector<double> probe_log_resp(K);
    Vec x0(d);
    Vec delta(d);
    auto estimate = [&](std::span<const double> xp) {
        ctx.marginal.log_responsibilities(xp, probe_log_resp);
        for (int i = 0; i < d; ++i) delta[i] = xp[i] - x[i];
        double num = 0.0, den = 0.0;
        for (int j = 0; j < n; ++j) {
            const int k = comp[j];
            const Mat& Sk = ctx.posterior.covariance(k);
            const Mat& Lk = ctx.posterior.covariance_cholesky(k);
            // m_k(xp) = m_k(x) + shift_rate * S_k (xp - x)
            for (int i = 0; i < d; ++i) {
                double v = ctx.posterior.mean(k)[i];
                for (int c = 0; c < d; ++c) v += ctx.shift_rate * Sk(i, c) * delta[c];
                for (int c = 0; c <= i; ++c) v += Lk(i, c) * z[static_cast<size_t>(j) * d + c];
                x0[i] = v;
            }
            const double w = std::exp(probe_log_resp[k] - base_log_resp[k]);
            num += w * reward.evaluate(x0) / alpha;
            den += w;
        }
        return num / den;
    };

    Vec u(d);
    for (int i = 0; i < d; ++i) {
        const double h = opts.fd_step_rel * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double up = estimate(probe);
        probe[i] = x[i] - h;
        const double down = estimate(probe);
        probe[i] = x[i];
        u[i] = (up - down) / (2.0 * h);
    }
    return u;
}

double posterior_mean_reward(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                             const NoiseSchedule& schedule, std::span<const double> x, double t,
                             const ControlApproxOptions& opts) {
    if (!(alpha > 0.0)) throw std::domain_error("posterior_mean_reward: alpha must be > 0");
    require_time(t, schedule, "posterior_mean_reward");
    const GaussianMixture post = posterior_x0_given_xt(prior, schedule, t, x);
    const int d = prior.dim();
    if (reward.kind() == RewardSpec::Kind::Linear) {
        double v = 0.0;
        for (int k = 0; k < post.components(); ++k)
            v += post.weights()[k] * (dot(reward.linear_coeff(), post.mean(k)) + reward.offset());
        return v / alpha;
    }
    if (reward.kind() == RewardSpec::Kind::Quadratic) {
        const Mat& A = reward.quadratic_matrix();
        double v = 0.0;
        for (int k = 0; k < post.components(); ++k) {
            const Vec& mk = post.mean(k);
            const Mat& Sk = post.covariance(k);
            double trace = 0.0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) trace += A(i, j) * Sk(j, i);
            v += post.weights()[k] *
                 (dot(mk, mat_vec(A, mk)) + trace + dot(reward.linear_coeff(), mk) + reward.offset());
        }
        return v / alpha;
    }
    RandomSource rng(opts.seed, 1);
    const int n = std::max(16, opts.mc_draws);
    double acc = 0.0;
    Vec draw(d);
    for (int j = 0; j < n; ++j) {
        post.sample(rng, draw);
        acc += reward.evaluate(draw);
    }
    return acc / (n * alpha);
}

}  // namespace dblend
