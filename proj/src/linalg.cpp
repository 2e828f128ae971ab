#include "driftblend/linalg.hpp"

#include <cmath>
#include <string>

namespace dblend {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Mat mat_add(const Mat& a, const Mat& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("mat_add: shape mismatch");
    Mat c = a;
    for (size_t i = 0; i < c.a.size(); ++i) c.a[i] += b.a[i];
    return c;
}

Mat mat_scale(const Mat& a, double s) {
    Mat c = a;
    for (double& v : c.a) v *= s;
    return c;
}

Mat mat_mul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows) throw std::invalid_argument("mat_mul: shape mismatch");
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vec mat_vec(const Mat& a, std::span<const double> x) {
    if (a.cols != static_cast<int>(x.size())) throw std::invalid_argument("mat_vec: shape mismatch");
    Vec y(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Mat transpose(const Mat& a) {
    Mat t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

bool is_symmetric(const Mat& a, double tol) {
    if (a.rows != a.cols) return false;
    for (int i = 0; i < a.rows; ++i)
        for (int j = i + 1; j < a.cols; ++j) {
            double scale = 1.0 + std::abs(a(i, j)) + std::abs(a(j, i));
            if (std::abs(a(i, j) - a(j, i)) > tol * scale) return false;
        }
    return true;
}

Mat cholesky(const Mat& a) {
    if (a.rows != a.cols) throw std::invalid_argument("cholesky: matrix not square");
    const int n = a.rows;
    Mat L(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s))
                    throw std::domain_error("cholesky: matrix not positive definite (pivot " +
                                            std::to_string(i) + ")");
                L(i, i) = std::sqrt(s);
            } else {
                L(i, j) = s / L(j, j);
            }
        }
    }
    return L;
}

Vec chol_solve(const Mat& L, std::span<const double> b) {
    const int n = L.rows;
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("chol_solve: size mismatch");
    Vec y(n), x(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= L(i, k) * y[k];
        y[i] = s / L(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
        x[i] = s / L(i, i);
    }
    return x;
}

Mat chol_inverse(const Mat& L) {
    const int n = L.rows;
    Mat inv(n, n);
    Vec e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        Vec col = chol_solve(L, e);
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

double chol_logdet(const Mat& L) {
    double s = 0.0;
    for (int i = 0; i < L.rows; ++i) s += std::log(L(i, i));
    return 2.0 * s;
}

}  // namespace dblend
