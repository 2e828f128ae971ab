#include "driftblend/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dblend {

NoiseSchedule::NoiseSchedule(double bmin, double bmax, double T)
    : beta_min(bmin), beta_max(bmax), horizon(T) {
    if (!(beta_min > 0.0)) throw std::invalid_argument("NoiseSchedule: beta_min must be > 0");
    if (!(beta_max >= beta_min))
        throw std::invalid_argument("NoiseSchedule: beta_max must be >= beta_min");
    if (!(horizon > 0.0)) throw std::invalid_argument("NoiseSchedule: horizon must be > 0");
}

double beta_at(const NoiseSchedule& s, double t) {
    if (t < 0.0 || t > s.horizon)
        throw std::domain_error("beta_at: t=" + std::to_string(t) + " outside [0, " +
                                std::to_string(s.horizon) + "]");
    return s.beta_min + (t / s.horizon) * (s.beta_max - s.beta_min);
}

double alpha_bar(const NoiseSchedule& s, double t) {
    if (t < 0.0 || t > s.horizon)
        throw std::domain_error("alpha_bar: t=" + std::to_string(t) + " outside [0, " +
                                std::to_string(s.horizon) + "]");
    const double integral = s.beta_min * t + (s.beta_max - s.beta_min) * t * t / (2.0 * s.horizon);
    return std::exp(-integral);
}

TimeGrid::TimeGrid(std::vector<double> k) : knots(std::move(k)) {
    if (knots.size() < 2) throw std::invalid_argument("TimeGrid: need at least one step");
    if (knots.front() != 0.0) throw std::invalid_argument("TimeGrid: first knot must be 0");
    for (size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1]))
            throw std::invalid_argument("TimeGrid: knots must be strictly increasing");
    if (!(knots.back() > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
}

TimeGrid TimeGrid::uniform(int num_steps, double horizon) {
    if (num_steps < 1) throw std::invalid_argument("TimeGrid: num_steps must be >= 1");
    std::vector<double> k(num_steps + 1);
    for (int i = 0; i <= num_steps; ++i) k[i] = horizon * static_cast<double>(i) / num_steps;
    k.back() = horizon;
    return TimeGrid(std::move(k));
}

TimeGrid TimeGrid::geometric(int num_steps, double horizon, double gamma) {
    if (num_steps < 1) throw std::invalid_argument("TimeGrid: num_steps must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("TimeGrid: gamma must be > 0");
    std::vector<double> k(num_steps + 1);
    for (int i = 0; i <= num_steps; ++i)
        k[i] = horizon * std::pow(static_cast<double>(i) / num_steps, gamma);
    k.back() = horizon;
    return TimeGrid(std::move(k));
}

}  // namespace dblend
