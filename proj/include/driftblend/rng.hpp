#pragma once

#include <cstdint>

namespace dblend {

/// Counter-based deterministic generator. A source is identified by
/// (seed, stream); identical (seed, stream, call sequence) reproduces the
/// same draws bit-for-bit, and distinct streams are decorrelated, so
/// per-trajectory streams make batch results independent of scheduling.
class RandomSource {
  public:
    RandomSource(uint64_t seed, uint64_t stream = 0);

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

    uint64_t next_u64();

    /// Uniform draw in the open interval (0, 1).
    double uniform();

    /// Standard normal via Box-Muller (spare value cached).
    double normal();

    /// Independent stream derived from this source's identity; advancing
    /// the parent does not affect the child.
    RandomSource substream(uint64_t id) const;

  private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dblend
