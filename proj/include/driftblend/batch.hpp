#pragma once

#include <span>
#include <vector>

namespace dblend {

/// A batch of d-dimensional points at a common time label, stored flat
/// (point-major). All entries are finite by construction of the producers.
struct SampleBatch {
    int dim = 1;
    double time_label = 0.0;
    std::vector<double> data;  // size() == n * dim

    SampleBatch() = default;
    SampleBatch(int d, double t, std::vector<double> values);

    size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const double> point(size_t i) const { return {data.data() + i * dim, static_cast<size_t>(dim)}; }
    std::span<double> point(size_t i) { return {data.data() + i * dim, static_cast<size_t>(dim)}; }

    /// Per-coordinate sample mean.
    std::vector<double> mean() const;
    /// Per-coordinate unbiased sample variance.
    std::vector<double> variance() const;
    /// Values of one coordinate across the batch.
    std::vector<double> column(int j) const;
};

}  // namespace dblend
