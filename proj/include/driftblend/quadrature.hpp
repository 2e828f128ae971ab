#pragma once

#include <functional>

namespace dblend {

/// Composite Gauss-Legendre integration over [a, b] with `panels`
/// subintervals of fixed order-20 rule each.
double integrate_1d(const std::function<double(double)>& f, double a, double b, int panels = 64);

/// Panel-doubling wrapper: refines until two successive levels agree to
/// rel_tol (or max_panels is reached).
double integrate_1d_adaptive(const std::function<double(double)>& f, double a, double b,
                             double rel_tol = 1e-10, int max_panels = 4096);

/// Tensor-product rule over the box [ax,bx] x [ay,by].
double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay,
                    double by, int panels = 48);

}  // namespace dblend
