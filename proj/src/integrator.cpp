#include "driftblend/integrator.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "driftblend/parallel.hpp"

namespace dblend {

namespace {

[[noreturn]] void throw_nonfinite(std::span<const double> x, double t) {
    std::ostringstream msg;
    msg << "non-finite drift value at t=" << t << ", x=(";
    for (size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
    msg << ")";
    throw IntegrationError(msg.str());
}

}  // namespace

SampleBatch forward_perturb(const SampleBatch& x0, double t, const NoiseSchedule& schedule,
                            RandomSource& rng) {
    const double ab = alpha_bar(schedule, t);
    const double signal = std::sqrt(ab);
    const double noise = std::sqrt(1.0 - ab);
    std::vector<double> data(x0.data.size());
    for (size_t i = 0; i < data.size(); ++i) data[i] = signal * x0.data[i] + noise * rng.normal();
    return SampleBatch(x0.dim, t, std::move(data));
}

SampleBatch euler_maruyama_reverse(const DriftModel& drift, const NoiseSchedule& schedule,
                                   const TimeGrid& grid, const RandomSource& base, int batch_size,
                                   int dim) {
    if (batch_size < 1) throw std::invalid_argument("euler_maruyama_reverse: batch_size must be >= 1");
    if (dim != drift.dim())
        throw std::invalid_argument("euler_maruyama_reverse: drift dimension mismatch");
    if (std::abs(grid.horizon() - schedule.horizon) > 1e-12)
        throw std::invalid_argument("euler_maruyama_reverse: grid horizon differs from schedule");
    const int N = grid.num_steps();
    const size_t d = static_cast<size_t>(dim);

    std::vector<double> out(static_cast<size_t>(batch_size) * d);
    parallel_for(static_cast<size_t>(batch_size), [&](size_t begin, size_t end) {
        const size_t chunk = end - begin;
        std::vector<RandomSource> streams;
        streams.reserve(chunk);
        std::vector<double> x(chunk * d);
        std::vector<double> f(chunk * d);
        for (size_t i = 0; i < chunk; ++i) {
            streams.push_back(base.substream(begin + i));
            for (size_t j = 0; j < d; ++j) x[i * d + j] = streams[i].normal();
        }
        for (int k = N; k >= 1; --k) {
            const double t = grid.knots[k];
            const double dt = grid.knots[k] - grid.knots[k - 1];
            const double sigma_dt = std::sqrt(beta_at(schedule, t) * dt);
            drift.eval_batch(x, t, f);
            for (size_t i = 0; i < chunk; ++i) {
                for (size_t j = 0; j < d; ++j) {
                    const double fv = f[i * d + j];
                    if (!std::isfinite(fv))
                        throw_nonfinite(std::span<const double>(x.data() + i * d, d), t);
                    x[i * d + j] += -fv * dt + sigma_dt * streams[i].normal();
                }
            }
        }
        std::copy(x.begin(), x.end(), out.begin() + begin * d);
    });
    return SampleBatch(dim, 0.0, std::move(out));
}

void euler_steps_inplace(const DriftModel& drift, const NoiseSchedule& schedule,
                         const TimeGrid& grid, RandomSource& rng, std::span<double> x, int k_hi,
                         int steps) {
    if (k_hi - steps < 0 || k_hi > grid.num_steps())
        throw std::invalid_argument("euler_steps_inplace: step range outside grid");
    const size_t d = x.size();
    std::vector<double> f(d);
    for (int k = k_hi; k > k_hi - steps; --k) {
        const double t = grid.knots[k];
        const double dt = grid.knots[k] - grid.knots[k - 1];
        const double sigma_dt = std::sqrt(beta_at(schedule, t) * dt);
        drift.eval_batch(x, t, f);
        for (size_t j = 0; j < d; ++j) {
            if (!std::isfinite(f[j])) throw_nonfinite(x, t);
            x[j] += -f[j] * dt + sigma_dt * rng.normal();
        }
    }
}

}  // namespace dblend
