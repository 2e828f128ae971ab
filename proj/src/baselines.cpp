#include "driftblend/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "driftblend/parallel.hpp"

namespace dblend {

void RggConfig::validate() const {
    if (!(gamma > -1.0)) throw std::invalid_argument("RggConfig: gamma must be > -1");
    if (!(alpha > 0.0)) throw std::invalid_argument("RggConfig: alpha must be > 0");
}

void CodeConfig::validate() const {
    if (particles < 1) throw std::invalid_argument("CodeConfig: particles must be >= 1");
    if (block_len < 1) throw std::invalid_argument("CodeConfig: block length must be >= 1");
}

DriftPtr morl_oracle(const GaussianMixture& prior, std::span<const RewardSpec> basis,
                     const PreferenceWeights& w, double alpha, double lambda,
                     const NoiseSchedule& schedule) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("morl_oracle: lambda must be >= 0");
    if (lambda == 0.0) return pretrained_drift(prior, schedule);
    const RewardSpec combined = scalarize(basis, w);
    return exact_finetuned_drift(prior, combined, alpha / lambda, schedule);
}

ScoreFn score_fn_of(DriftPtr drift, NoiseSchedule schedule) {
    if (!drift) throw std::invalid_argument("score_fn_of: null drift");
    return [drift, schedule](std::span<const double> x, double t) {
        Vec out(x.size());
        score_from_drift(*drift, schedule, x, t, out);
        return out;
    };
}

Vec tweedie_denoise(std::span<const double> x_t, double t, const ScoreFn& score,
                    const NoiseSchedule& schedule) {
    Vec out(x_t.begin(), x_t.end());
    if (!(t > 0.0)) return out;
    const double ab = alpha_bar(schedule, t);
    const double root = std::sqrt(ab);
    const Vec s = score(x_t, t);
    for (size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] + (1.0 - ab) * s[i]) / root;
    return out;
}

RggDrift::RggDrift(DriftPtr base, std::vector<RewardSpec> basis, PreferenceWeights w,
                   RggConfig config, NoiseSchedule schedule, TimeGrid grid)
    : base_(std::move(base)),
      basis_(std::move(basis)),
      w_(std::move(w.w)),
      config_(config),
      schedule_(schedule),
      grid_(std::move(grid)),
      zero_grad_events_(std::make_shared<std::atomic<long>>(0)) {
    config_.validate();
    if (basis_.empty()) throw std::invalid_argument("RggDrift: empty reward basis");
    if (basis_.size() != w_.size())
        throw std::invalid_argument("RggDrift: basis and weight lengths differ");
    tag_ = "rgg(" + base_->provenance() + ",gamma=" + std::to_string(config_.gamma) + ")";
}

int RggDrift::knot_index(double t) const {
    const auto& k = grid_.knots;
    auto it = std::lower_bound(k.begin(), k.end(), t);
    int idx = static_cast<int>(it - k.begin());
    if (idx >= static_cast<int>(k.size())) idx = static_cast<int>(k.size()) - 1;
    if (idx > 0 && std::abs(k[idx - 1] - t) < std::abs(k[idx] - t)) --idx;
    return std::max(1, idx);
}

void RggDrift::eval_batch(std::span<const double> xs, double t, std::span<double> out) const {
    base_->eval_batch(xs, t, out);
    const int d = dim();
    const size_t n = xs.size() / d;
    const int k = knot_index(t);
    const int N = grid_.num_steps();
    const int step_counter = config_.reverse_indexing ? k : (N - k + 1);
    const double lambda_k = std::pow(1.0 + config_.gamma, step_counter - 1);
    const double scale = lambda_k * beta_at(schedule_, t) / config_.alpha;

    const ScoreFn score = score_fn_of(base_, schedule_);
    Vec probe(d), grad(d), guidance(d);
    for (size_t i = 0; i < n; ++i) {
        std::span<const double> x = xs.subspan(i * d, d);
        std::fill(guidance.begin(), guidance.end(), 0.0);
        for (size_t m = 0; m < basis_.size(); ++m) {
            // central differences of x -> r_m(x0_hat(x, t))
            probe.assign(x.begin(), x.end());
            for (int j = 0; j < d; ++j) {
                const double h = 1e-4 * std::max(1.0, std::abs(x[j]));
                probe[j] = x[j] + h;
                const double up = basis_[m].evaluate(tweedie_denoise(probe, t, score, schedule_));
                probe[j] = x[j] - h;
                const double down = basis_[m].evaluate(tweedie_denoise(probe, t, score, schedule_));
                probe[j] = x[j];
                grad[j] = (up - down) / (2.0 * h);
            }
            double norm = std::sqrt(dot(grad, grad));
            if (config_.normalize_gradients) {
                if (norm > 1e-12) {
                    for (double& g : grad) g /= norm;
                } else {
                    zero_grad_events_->fetch_add(1, std::memory_order_relaxed);
                }
            }
            for (int j = 0; j < d; ++j) guidance[j] += w_[m] * grad[j];
        }
        // guidance raises the post-step mean, so it enters the drift negated
        for (int j = 0; j < d; ++j) out[i * d + j] -= scale * guidance[j];
    }
}

std::shared_ptr<const RggDrift> rgg_drift(DriftPtr base, std::vector<RewardSpec> basis,
                                          PreferenceWeights w, RggConfig config,
                                          NoiseSchedule schedule, TimeGrid grid) {
    return std::make_shared<RggDrift>(std::move(base), std::move(basis), std::move(w), config,
                                      schedule, std::move(grid));
}

SampleBatch code_sample(const DriftModel& drift, const RewardSpec& reward, const CodeConfig& config,
                        const NoiseSchedule& schedule, const TimeGrid& grid,
                        const RandomSource& base, int batch_size, int dim) {
    config.validate();
    const int N = grid.num_steps();
    if (N % config.block_len != 0)
        throw std::invalid_argument("code_sample: block length must divide the step count");
    if (dim != drift.dim()) throw std::invalid_argument("code_sample: drift dimension mismatch");
    const int blocks = N / config.block_len;
    const size_t d = static_cast<size_t>(dim);

    auto drift_ptr = std::shared_ptr<const DriftModel>(&drift, [](const DriftModel*) {});
    const ScoreFn score = score_fn_of(drift_ptr, schedule);

    std::vector<double> out(static_cast<size_t>(batch_size) * d);
    parallel_for(static_cast<size_t>(batch_size), [&](size_t begin, size_t end) {
        for (size_t traj = begin; traj < end; ++traj) {
            RandomSource main = base.substream(traj);
            Vec x(d);
            for (size_t j = 0; j < d; ++j) x[j] = main.normal();
            for (int b = 0; b < blocks; ++b) {
                const int k_hi = N - b * config.block_len;
                const double t_lo = grid.knots[k_hi - config.block_len];
                Vec best_x;
                RandomSource best_rng = main;
                double best_reward = 0.0;
                for (int p = 0; p < config.particles; ++p) {
                    Vec px = x;
                    RandomSource prng =
                        p == 0 ? main
                               : main.substream((static_cast<uint64_t>(b) << 32) |
                                                static_cast<uint64_t>(p));
                    euler_steps_inplace(drift, schedule, grid, prng, px, k_hi, config.block_len);
                    const Vec denoised = tweedie_denoise(px, t_lo, score, schedule);
                    const double r = reward.evaluate(denoised);
                    if (p == 0 || r > best_reward) {
                        best_reward = r;
                        best_x = std::move(px);
                        best_rng = prng;
                    }
                }
                x = std::move(best_x);
                main = best_rng;  // the kept particle's stream continues
            }
            std::copy(x.begin(), x.end(), out.begin() + traj * d);
        }
    });
    return SampleBatch(dim, 0.0, std::move(out));
}

Vec best_of_n(const DriftModel& drift, const RewardSpec& reward, int n,
              const NoiseSchedule& schedule, const TimeGrid& grid, const RandomSource& base) {
    if (n < 1) throw std::invalid_argument("best_of_n: n must be >= 1");
    const SampleBatch batch = euler_maruyama_reverse(drift, schedule, grid, base, n, drift.dim());
    size_t best = 0;
    double best_reward = reward.evaluate(batch.point(0));
    for (size_t i = 1; i < batch.size(); ++i) {
        const double r = reward.evaluate(batch.point(i));
        if (r > best_reward) {
            best_reward = r;
            best = i;
        }
    }
    std::span<const double> p = batch.point(best);
    return Vec(p.begin(), p.end());
}

}  // namespace dblend
