#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dblend {

using Vec = std::vector<double>;

/// Dense row-major matrix, sized for small dimensions (covariances, feature
/// normal equations). Not a general linear-algebra library.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

double dot(std::span<const double> a, std::span<const double> b);

Mat mat_add(const Mat& a, const Mat& b);
Mat mat_scale(const Mat& a, double s);
Mat mat_mul(const Mat& a, const Mat& b);
Vec mat_vec(const Mat& a, std::span<const double> x);
Mat transpose(const Mat& a);
bool is_symmetric(const Mat& a, double tol = 1e-9);

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Throws std::domain_error if the matrix is not PD.
Mat cholesky(const Mat& a);

/// Solve A x = b given the Cholesky factor L of A.
Vec chol_solve(const Mat& L, std::span<const double> b);

/// Inverse from the Cholesky factor.
Mat chol_inverse(const Mat& L);

/// log det(A) from the Cholesky factor of A.
double chol_logdet(const Mat& L);

}  // namespace dblend
