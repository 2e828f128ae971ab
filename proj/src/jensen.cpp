#include "driftblend/jensen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace dblend {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Conditional law of R = r(x_0)/alpha given x_t for a 1D linear reward:
/// scalar mixture with responsibilities resp_k, means rho_k, variances tau_k^2.
struct ConditionalReward1D {
    std::vector<double> resp;
    std::vector<double> rho;
    std::vector<double> tau2;
    std::vector<double> drho_dx;   // d rho_k / d x
    std::vector<double> dresp_dx;  // d resp_k / d x

    ConditionalReward1D(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                        const NoiseSchedule& schedule, double x, double t) {
        const double a = reward.linear_coeff()[0];
        const double b = reward.offset();
        const double ab = alpha_bar(schedule, t);
        const double shift_rate = std::sqrt(ab) / (1.0 - ab);
        const Vec xv{x};
        const GaussianMixture post = posterior_x0_given_xt(prior, schedule, t, xv);
        const GaussianMixture marg = marginal_at(prior, schedule, t);
        const int K = post.components();
        resp.resize(K);
        rho.resize(K);
        tau2.resize(K);
        drho_dx.resize(K);
        dresp_dx.resize(K);
        std::vector<double> glc(K);  // d log N_k(x; c_k, V_k) / dx
        double mean_glc = 0.0;
        for (int k = 0; k < K; ++k) {
            resp[k] = post.weights()[k];
            const double Sk = post.covariance(k)(0, 0);
            rho[k] = (a * post.mean(k)[0] + b) / alpha;
            tau2[k] = a * a * Sk / (alpha * alpha);
            drho_dx[k] = a * shift_rate * Sk / alpha;
            glc[k] = (marg.mean(k)[0] - x) / marg.covariance(k)(0, 0);
            mean_glc += resp[k] * glc[k];
        }
        for (int k = 0; k < K; ++k) dresp_dx[k] = resp[k] * (glc[k] - mean_glc);
    }

    double mass_in(double lo, double hi) const {
        double m = 0.0;
        for (size_t k = 0; k < resp.size(); ++k) {
            const double tau = std::sqrt(tau2[k]);
            if (tau == 0.0) {
                m += (rho[k] >= lo && rho[k] <= hi) ? resp[k] : 0.0;
            } else {
                m += resp[k] * 0.5 *
                     (std::erfc((lo - rho[k]) / (tau * M_SQRT2)) -
                      std::erfc((hi - rho[k]) / (tau * M_SQRT2)));
            }
        }
        return m;
    }
};

}  // namespace

Vec gap_delta(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
              const NoiseSchedule& schedule, std::span<const double> x, double t,
              const ControlApproxOptions& opts) {
    const Vec u = control_exact(prior, reward, alpha, schedule, x, t);
    const Vec ubar = control_approx(prior, reward, alpha, schedule, x, t, opts);
    Vec d(u.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = u[i] - ubar[i];
    return d;
}

MonteCarloStat estimate_L1(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                           const NoiseSchedule& schedule, std::span<const double> x, double t,
                           int num_draws, uint64_t seed) {
    if (num_draws < 16) throw std::invalid_argument("estimate_L1: need at least 16 draws");
    const GaussianMixture post = posterior_x0_given_xt(prior, schedule, t, x);
    const GaussianMixture marg = marginal_at(prior, schedule, t);
    const double ab = alpha_bar(schedule, t);
    const double shift_rate = std::sqrt(ab) / (1.0 - ab);
    const int d = prior.dim();
    const int K = post.components();

    const double rtilde = posterior_mean_reward(prior, reward, alpha, schedule, x, t);
    const Vec ubar = control_approx(prior, reward, alpha, schedule, x, t);

    // score-function coefficients d log resp_k / dx
    std::vector<Vec> grad_log_resp(K, Vec(d, 0.0));
    {
        Vec diff(d);
        std::vector<Vec> glc(K);
        Vec mean_glc(d, 0.0);
        for (int k = 0; k < K; ++k) {
            for (int i = 0; i < d; ++i) diff[i] = marg.mean(k)[i] - x[i];
            glc[k] = chol_solve(marg.covariance_cholesky(k), diff);
            for (int i = 0; i < d; ++i) mean_glc[i] += post.weights()[k] * glc[k][i];
        }
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < d; ++i) grad_log_resp[k][i] = glc[k][i] - mean_glc[i];
    }

    RandomSource rng(seed, 0);
    Vec x0(d), g(d), z(d);
    double acc = 0.0, acc2 = 0.0;
    for (int j = 0; j < num_draws; ++j) {
        const int k = post.sample_component(rng);
        for (int i = 0; i < d; ++i) z[i] = rng.normal();
        const Mat& L = post.covariance_cholesky(k);
        for (int i = 0; i < d; ++i) {
            double v = post.mean(k)[i];
            for (int c = 0; c <= i; ++c) v += L(i, c) * z[c];
            x0[i] = v;
        }
        const double R = reward.evaluate(x0) / alpha;
        const Vec grad_r = reward.gradient(x0);
        const Vec s_grad = mat_vec(post.covariance(k), grad_r);
        for (int i = 0; i < d; ++i)
            g[i] = shift_rate * s_grad[i] / alpha + (R - rtilde) * grad_log_resp[k][i] - ubar[i];
        const double n2 = dot(g, g);
        acc += n2;
        acc2 += n2 * n2;
    }
    const double mean = acc / num_draws;
    const double var = std::max(0.0, acc2 / num_draws - mean * mean);
    const double se_mean = std::sqrt(var / num_draws);
    MonteCarloStat out;
    out.value = std::sqrt(std::max(0.0, mean));
    out.stderr_ = out.value > 1e-12 ? se_mean / (2.0 * out.value) : std::sqrt(se_mean);
    return out;
}

MonteCarloStat estimate_L2(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                           const NoiseSchedule& schedule, std::span<const double> x, double t,
                           int num_draws, uint64_t seed) {
    if (num_draws < 16) throw std::invalid_argument("estimate_L2: need at least 16 draws");
    const GaussianMixture post = posterior_x0_given_xt(prior, schedule, t, x);
    RandomSource rng(seed, 0);
    std::vector<double> r(num_draws);
    Vec draw(prior.dim());
    double rmax = -1e300;
    for (int j = 0; j < num_draws; ++j) {
        post.sample(rng, draw);
        r[j] = reward.evaluate(draw) / alpha;
        rmax = std::max(rmax, r[j]);
    }
    double A = 0.0, B = 0.0, varY = 0.0, varY2 = 0.0, covY = 0.0;
    std::vector<double> y(num_draws);
    for (int j = 0; j < num_draws; ++j) {
        y[j] = std::exp(r[j] - rmax);
        A += y[j];
        B += y[j] * y[j];
    }
    A /= num_draws;
    B /= num_draws;
    for (int j = 0; j < num_draws; ++j) {
        const double dy = y[j] - A;
        const double dy2 = y[j] * y[j] - B;
        varY += dy * dy;
        varY2 += dy2 * dy2;
        covY += dy * dy2;
    }
    varY /= num_draws;
    varY2 /= num_draws;
    covY /= num_draws;
    const double ratio2 = std::max(0.0, B / (A * A) - 1.0);
    // delta method on g(A, B) = B / A^2
    const double gA = -2.0 * B / (A * A * A);
    const double gB = 1.0 / (A * A);
    const double var_g =
        std::max(0.0, (gA * gA * varY + gB * gB * varY2 + 2.0 * gA * gB * covY) / num_draws);
    const double se_g = std::sqrt(var_g);
    MonteCarloStat out;
    out.value = std::sqrt(ratio2);
    out.stderr_ = out.value > 1e-12 ? se_g / (2.0 * out.value) : std::sqrt(se_g);
    return out;
}

double estimate_L2_closed_form(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                               const NoiseSchedule& schedule, std::span<const double> x, double t) {
    if (reward.kind() != RewardSpec::Kind::Linear)
        throw std::invalid_argument("estimate_L2_closed_form: linear rewards only");
    const GaussianMixture post = posterior_x0_given_xt(prior, schedule, t, x);
    const Vec& a = reward.linear_coeff();
    const int K = post.components();
    std::vector<double> l1(K), l2(K);
    double m1 = -1e300, m2 = -1e300;
    for (int k = 0; k < K; ++k) {
        const double rho = (dot(a, post.mean(k)) + reward.offset()) / alpha;
        const double tau2 = dot(a, mat_vec(post.covariance(k), a)) / (alpha * alpha);
        const double lw = std::log(std::max(post.weights()[k], 1e-300));
        l1[k] = lw + rho + 0.5 * tau2;
        l2[k] = lw + 2.0 * rho + 2.0 * tau2;
        m1 = std::max(m1, l1[k]);
        m2 = std::max(m2, l2[k]);
    }
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < K; ++k) {
        s1 += std::exp(l1[k] - m1);
        s2 += std::exp(l2[k] - m2);
    }
    const double log_e1 = m1 + std::log(s1);
    const double log_e2 = m2 + std::log(s2);
    return std::sqrt(std::max(0.0, std::expm1(log_e2 - 2.0 * log_e1)));
}

std::optional<double> estimate_L3(const GaussianMixture& prior, const RewardSpec& reward,
                                  double alpha, const NoiseSchedule& schedule,
                                  std::span<const double> x, double t, const L3Options& opts) {
    if (prior.dim() != 1 || reward.kind() != RewardSpec::Kind::Linear) return std::nullopt;
    const ConditionalReward1D cond(prior, reward, alpha, schedule, x[0], t);
    const int K = static_cast<int>(cond.resp.size());

    double lo, hi;
    if (opts.r_lo && opts.r_hi) {
        lo = *opts.r_lo;
        hi = *opts.r_hi;
    } else {
        lo = 1e300;
        hi = -1e300;
        for (int k = 0; k < K; ++k) {
            const double tau = std::sqrt(cond.tau2[k]);
            lo = std::min(lo, cond.rho[k] - 6.0 * tau);
            hi = std::max(hi, cond.rho[k] + 6.0 * tau);
        }
    }
    const double mass = cond.mass_in(lo, hi);
    if (mass < opts.coverage)
        throw std::invalid_argument("estimate_L3: r-grid covers " + std::to_string(mass) +
                                    " of the conditional mass, need " + std::to_string(opts.coverage));

    // rtilde'(x): the x-derivative is taken per unit of predicted reward, so
    // a pure shift family k(x) + noise measures exactly zero.
    double rate = 0.0;
    for (int k = 0; k < K; ++k) rate += cond.resp[k] * cond.drho_dx[k] + cond.dresp_dx[k] * cond.rho[k];
    if (std::abs(rate) < 1e-14)
        throw std::domain_error("estimate_L3: predicted reward is locally flat in x");

    double sup = 0.0;
    for (int g = 0; g < opts.r_grid_points; ++g) {
        const double r = lo + (hi - lo) * g / (opts.r_grid_points - 1);
        double p = 0.0, dp_dr = 0.0, dp_dx = 0.0;
        for (int k = 0; k < K; ++k) {
            const double tau2 = cond.tau2[k];
            const double diff = r - cond.rho[k];
            const double phi = std::exp(-0.5 * diff * diff / tau2) / std::sqrt(2.0 * M_PI * tau2);
            p += cond.resp[k] * phi;
            dp_dr += cond.resp[k] * phi * (-diff / tau2);
            dp_dx += cond.dresp_dx[k] * phi + cond.resp[k] * phi * (diff / tau2) * cond.drho_dx[k];
        }
        if (p < 1e-290) continue;
        const double dev = dp_dx / (p * rate) + dp_dr / p;
        sup = std::max(sup, std::abs(dev));
    }
    return (1.0 + 1.0 / alpha) * sup;
}

std::vector<GapReport> verify_bound(const GaussianMixture& prior, const RewardSpec& reward,
                                    double alpha, const NoiseSchedule& schedule,
                                    const std::vector<Vec>& xs, const std::vector<double>& ts,
                                    const VerifyBoundOptions& opts) {
    std::vector<GapReport> reports;
    reports.reserve(xs.size() * ts.size());
    uint64_t point = 0;
    for (double t : ts) {
        for (const Vec& x : xs) {
            GapReport rep;
            rep.t = t;
            rep.x = x;
            rep.delta_norm = norm2(gap_delta(prior, reward, alpha, schedule, x, t, opts.approx));
            const MonteCarloStat l1 =
                estimate_L1(prior, reward, alpha, schedule, x, t, opts.l1_draws, opts.seed + 2 * point);
            const MonteCarloStat l2 = estimate_L2(prior, reward, alpha, schedule, x, t, opts.l2_draws,
                                                  opts.seed + 2 * point + 1);
            rep.l1 = l1.value;
            rep.l1_stderr = l1.stderr_;
            rep.l2 = l2.value;
            rep.l2_stderr = l2.stderr_;
            rep.l3 = estimate_L3(prior, reward, alpha, schedule, x, t, opts.l3);
            const double l3v = rep.l3.value_or(0.0);
            rep.bound = rep.l1 * rep.l2 + l3v;
            const double slack_bound = (rep.l1 + opts.slack_sigmas * rep.l1_stderr) *
                                           (rep.l2 + opts.slack_sigmas * rep.l2_stderr) +
                                       l3v;
            rep.satisfied = rep.delta_norm <= slack_bound + 1e-9;
            reports.push_back(std::move(rep));
            ++point;
        }
    }
    return reports;
}

void write_gap_reports_csv(std::ostream& os, const std::vector<GapReport>& reports, int dim) {
    os << "t";
    for (int i = 0; i < dim; ++i) os << ",x" << i;
    os << ",delta,L1,L1_stderr,L2,L2_stderr,L3,bound,satisfied\n";
    for (const GapReport& r : reports) {
        os << fmt(r.t);
        for (int i = 0; i < dim; ++i) os << "," << fmt(r.x[i]);
        os << "," << fmt(r.delta_norm) << "," << fmt(r.l1) << "," << fmt(r.l1_stderr) << ","
           << fmt(r.l2) << "," << fmt(r.l2_stderr) << ",";
        if (r.l3)
            os << fmt(*r.l3);
        else
            os << "not_computed";
        os << "," << fmt(r.bound) << "," << (r.satisfied ? "true" : "false") << "\n";
    }
}

}  // namespace dblend
