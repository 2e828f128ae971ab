#include "driftblend/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "driftblend/quadrature.hpp"

namespace dblend {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Bounding interval covering all component mass of both mixtures.
std::pair<double, double> bounding_1d(const GaussianMixture& p, const GaussianMixture& q,
                                      double sigmas = 12.0) {
    double lo = 1e300, hi = -1e300;
    for (const GaussianMixture* m : {&p, &q}) {
        for (int k = 0; k < m->components(); ++k) {
            const double s = std::sqrt(m->covariance(k)(0, 0));
            lo = std::min(lo, m->mean(k)[0] - sigmas * s);
            hi = std::max(hi, m->mean(k)[0] + sigmas * s);
        }
    }
    return {lo, hi};
}

}  // namespace

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1_1d: empty batch");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const size_t na = sa.size(), nb = sb.size();
    if (na == nb) {
        double acc = 0.0;
        for (size_t i = 0; i < na; ++i) acc += std::abs(sa[i] - sb[i]);
        return acc / static_cast<double>(na);
    }
    // exact integral of |Fa^{-1} - Fb^{-1}| over the merged quantile breakpoints
    double acc = 0.0;
    size_t ia = 0, ib = 0;
    double q = 0.0;
    while (ia < na && ib < nb) {
        const double qa = static_cast<double>(ia + 1) / na;
        const double qb = static_cast<double>(ib + 1) / nb;
        const double next = std::min(qa, qb);
        acc += (next - q) * std::abs(sa[ia] - sb[ib]);
        q = next;
        if (qa <= qb) ++ia;
        if (qb <= qa) ++ib;
    }
    return acc;
}

double wasserstein1_1d(const SampleBatch& a, const SampleBatch& b) {
    if (a.dim != 1 || b.dim != 1)
        throw std::invalid_argument("wasserstein1_1d: batches must be one-dimensional");
    return wasserstein1_1d(std::span<const double>(a.data), std::span<const double>(b.data));
}

double kl_estimate(const GaussianMixture& p, const GaussianMixture& q, KlMethod method,
                   const KlOptions& opts) {
    if (p.dim() != q.dim()) throw std::invalid_argument("kl_estimate: dimension mismatch");
    double value = 0.0;
    if (method == KlMethod::Quadrature) {
        if (p.dim() == 1) {
            const auto [lo, hi] = bounding_1d(p, q);
            value = integrate_1d(
                [&](double x) {
                    const Vec xv{x};
                    const double lp = p.log_density(xv);
                    return std::exp(lp) * (lp - q.log_density(xv));
                },
                lo, hi, opts.panels);
        } else if (p.dim() == 2) {
            double lo = 1e300, hi = -1e300;
            for (const GaussianMixture* m : {&p, &q})
                for (int k = 0; k < m->components(); ++k) {
                    double smax = 0.0;
                    for (int i = 0; i < 2; ++i) smax = std::max(smax, m->covariance(k)(i, i));
                    const double reach = 12.0 * std::sqrt(smax);
                    for (int i = 0; i < 2; ++i) {
                        lo = std::min(lo, m->mean(k)[i] - reach);
                        hi = std::max(hi, m->mean(k)[i] + reach);
                    }
                }
            value = integrate_2d(
                [&](double x, double y) {
                    const Vec xv{x, y};
                    const double lp = p.log_density(xv);
                    return std::exp(lp) * (lp - q.log_density(xv));
                },
                lo, hi, lo, hi, std::max(8, opts.panels / 8));
        } else {
            throw std::invalid_argument("kl_estimate: quadrature supports 1D/2D only");
        }
    } else {
        RandomSource rng(opts.seed, 0);
        Vec draw(p.dim());
        double acc = 0.0;
        for (int i = 0; i < opts.mc_draws; ++i) {
            p.sample(rng, draw);
            acc += p.log_density(draw) - q.log_density(draw);
        }
        value = acc / opts.mc_draws;
    }
    return std::max(value, 0.0);
}

MeanStderr expected_reward(const SampleBatch& samples, const RewardSpec& reward) {
    const size_t n = samples.size();
    if (n == 0) throw std::invalid_argument("expected_reward: empty batch");
    double mean = 0.0, m2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double v = reward.evaluate(samples.point(i));
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    MeanStderr out;
    out.mean = mean;
    out.stderr_ = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return out;
}

double alignment_objective(const SampleBatch& samples, const RewardSpec& reward, double alpha,
                           const GaussianMixture& p_model, const GaussianMixture& p_pre,
                           ObjectiveKl mode) {
    if (!(alpha > 0.0)) throw std::domain_error("alignment_objective: alpha must be > 0");
    const MeanStderr r = expected_reward(samples, reward);
    double kl = 0.0;
    if (mode == ObjectiveKl::AnalyticQuadrature) {
        kl = kl_estimate(p_model, p_pre, p_model.dim() <= 2 ? KlMethod::Quadrature : KlMethod::MonteCarlo);
    } else {
        double acc = 0.0;
        for (size_t i = 0; i < samples.size(); ++i) {
            std::span<const double> x = samples.point(i);
            acc += p_model.log_density(x) - p_pre.log_density(x);
        }
        kl = std::max(acc / static_cast<double>(samples.size()), 0.0);
    }
    return r.mean - alpha * kl;
}

MeanStderr stepwise_kl(const DriftModel& a, const DriftModel& b, const NoiseSchedule& schedule,
                       const TimeGrid& grid, const RandomSource& base, int batch_size) {
    if (a.dim() != b.dim()) throw std::invalid_argument("stepwise_kl: dimension mismatch");
    const int N = grid.num_steps();
    const size_t d = static_cast<size_t>(a.dim());
    std::vector<RandomSource> streams;
    streams.reserve(batch_size);
    std::vector<double> x(static_cast<size_t>(batch_size) * d);
    std::vector<double> path(batch_size, 0.0);
    for (int i = 0; i < batch_size; ++i) {
        streams.push_back(base.substream(i));
        for (size_t j = 0; j < d; ++j) x[i * d + j] = streams[i].normal();
    }
    std::vector<double> fa(x.size()), fb(x.size());
    for (int k = N; k >= 1; --k) {
        const double t = grid.knots[k];
        const double dt = grid.knots[k] - grid.knots[k - 1];
        const double beta = beta_at(schedule, t);
        a.eval_batch(x, t, fa);
        b.eval_batch(x, t, fb);
        const double sigma_dt = std::sqrt(beta * dt);
        for (int i = 0; i < batch_size; ++i) {
            double step = 0.0;
            for (size_t j = 0; j < d; ++j) {
                const double diff = fa[i * d + j] - fb[i * d + j];
                step += diff * diff;
            }
            path[i] += step * dt / (2.0 * beta);
            for (size_t j = 0; j < d; ++j)
                x[i * d + j] += -fa[i * d + j] * dt + sigma_dt * streams[i].normal();
        }
    }
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < batch_size; ++i) {
        const double delta = path[i] - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (path[i] - mean);
    }
    MeanStderr out;
    out.mean = mean;
    out.stderr_ = batch_size > 1 ? std::sqrt(m2 / static_cast<double>(batch_size - 1) /
                                             static_cast<double>(batch_size))
                                 : 0.0;
    return out;
}

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
    auto dominates = [](const ParetoPoint& p, const ParetoPoint& q) {
        bool strict = false;
        for (size_t i = 0; i < p.reward_means.size(); ++i) {
            if (p.reward_means[i] < q.reward_means[i]) return false;
            if (p.reward_means[i] > q.reward_means[i]) strict = true;
        }
        return strict;
    };
    std::vector<ParetoPoint> front;
    for (size_t i = 0; i < points.size(); ++i) {
        if (i > 0 && points[i].reward_means.size() != points[0].reward_means.size())
            throw std::invalid_argument("pareto_front: inconsistent reward arity");
        bool dominated = false;
        for (size_t j = 0; j < points.size() && !dominated; ++j)
            if (j != i && dominates(points[j], points[i])) dominated = true;
        if (!dominated) front.push_back(points[i]);
    }
    return front;
}

void write_pareto_csv(std::ostream& os, const std::vector<ParetoPoint>& rows, int reward_count,
                      const std::string& sweep_column) {
    os << "method," << sweep_column;
    for (int i = 1; i <= reward_count; ++i) os << ",r" << i << "_mean,r" << i << "_se";
    os << ",kl,objective,seed,n_samples,status\n";
    for (const ParetoPoint& p : rows) {
        os << p.method << "," << fmt(p.w_or_lambda);
        for (int i = 0; i < reward_count; ++i) {
            if (i < static_cast<int>(p.reward_means.size()))
                os << "," << fmt(p.reward_means[i]) << "," << fmt(p.reward_stderrs[i]);
            else
                os << ",,";
        }
        if (p.objective_computed)
            os << "," << fmt(p.kl) << "," << fmt(p.objective);
        else
            os << ",not_computed,not_computed";
        os << "," << p.seed << "," << p.n_samples << "," << p.status << "\n";
    }
}

}  // namespace dblend
