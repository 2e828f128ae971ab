#pragma once

#include <vector>

namespace dblend {

/// Linear variance-preserving noise schedule on [0, T]:
///   beta(t)      = beta_min + (t/T) (beta_max - beta_min)
///   alpha_bar(t) = exp(-beta_min t - (beta_max - beta_min) t^2 / (2T))
/// so alpha_bar is strictly decreasing from 1 and the forward process is
///   x_t = sqrt(alpha_bar) x_0 + sqrt(1 - alpha_bar) eps.
struct NoiseSchedule {
    double beta_min = 0.1;
    double beta_max = 20.0;
    double horizon = 1.0;

    NoiseSchedule() = default;
    NoiseSchedule(double bmin, double bmax, double T);
};

double beta_at(const NoiseSchedule& s, double t);
double alpha_bar(const NoiseSchedule& s, double t);

/// Strictly increasing knots t_0 = 0 < t_1 < ... < t_N = T.
struct TimeGrid {
    std::vector<double> knots;

    explicit TimeGrid(std::vector<double> k);
    static TimeGrid uniform(int num_steps, double horizon);
    /// Knots T (k/N)^gamma; gamma > 1 concentrates steps near t = 0.
    static TimeGrid geometric(int num_steps, double horizon, double gamma);

    int num_steps() const { return static_cast<int>(knots.size()) - 1; }
    double horizon() const { return knots.back(); }
};

}  // namespace dblend
