#include "driftblend/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace dblend {

namespace {

constexpr int kOrder = 20;

struct GaussRule {
    std::array<double, kOrder> nodes{};
    std::array<double, kOrder> weights{};

    GaussRule() {
        // Newton iteration on Legendre P_n; nodes on (-1, 1)
        const int n = kOrder;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
    }
};

const GaussRule& rule() {
    static const GaussRule r;
    return r;
}

}  // namespace

double integrate_1d(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels < 1) throw std::invalid_argument("integrate_1d: panels must be >= 1");
    const GaussRule& r = rule();
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double half = 0.5 * h;
        double s = 0.0;
        for (int i = 0; i < kOrder; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
        total += s * half;
    }
    return total;
}

double integrate_1d_adaptive(const std::function<double(double)>& f, double a, double b,
                             double rel_tol, int max_panels) {
    double prev = integrate_1d(f, a, b, 16);
    for (int panels = 32; panels <= max_panels; panels *= 2) {
        const double cur = integrate_1d(f, a, b, panels);
        if (std::abs(cur - prev) <= rel_tol * (std::abs(cur) + 1e-300)) return cur;
        prev = cur;
    }
    return prev;
}

double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay,
                    double by, int panels) {
    return integrate_1d(
        [&](double x) {
            return integrate_1d([&](double y) { return f(x, y); }, ay, by, panels);
        },
        ax, bx, panels);
}

}  // namespace dblend
