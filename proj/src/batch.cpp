#include "driftblend/batch.hpp"

#include <cmath>
#include <stdexcept>

namespace dblend {

SampleBatch::SampleBatch(int d, double t, std::vector<double> values)
    : dim(d), time_label(t), data(std::move(values)) {
    if (dim < 1) throw std::invalid_argument("SampleBatch: dim must be >= 1");
    if (data.size() % dim != 0)
        throw std::invalid_argument("SampleBatch: data size not a multiple of dim");
    for (double v : data)
        if (!std::isfinite(v)) throw std::invalid_argument("SampleBatch: non-finite entry");
}

std::vector<double> SampleBatch::mean() const {
    std::vector<double> m(dim, 0.0);
    const size_t n = size();
    if (n == 0) return m;
    for (size_t i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) m[j] += data[i * dim + j];
    for (double& v : m) v /= static_cast<double>(n);
    return m;
}

std::vector<double> SampleBatch::variance() const {
    std::vector<double> v(dim, 0.0);
    const size_t n = size();
    if (n < 2) return v;
    const std::vector<double> m = mean();
    for (size_t i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) {
            const double d = data[i * dim + j] - m[j];
            v[j] += d * d;
        }
    for (double& x : v) x /= static_cast<double>(n - 1);
    return v;
}

std::vector<double> SampleBatch::column(int j) const {
    if (j < 0 || j >= dim) throw std::out_of_range("SampleBatch::column");
    const size_t n = size();
    std::vector<double> c(n);
    for (size_t i = 0; i < n; ++i) c[i] = data[i * dim + j];
    return c;
}

}  // namespace dblend
