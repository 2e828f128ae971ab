#include "driftblend/rng.hpp"

#include <cmath>

namespace dblend {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

uint64_t avalanche(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

uint64_t combine(uint64_t a, uint64_t b) { return avalanche(a + kGolden * (avalanche(b) | 1ull)); }

}  // namespace

RandomSource::RandomSource(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream), state_(combine(seed, stream)) {}

uint64_t RandomSource::next_u64() {
    state_ += kGolden;
    return avalanche(state_);
}

double RandomSource::uniform() {
    // 53-bit mantissa, offset by half an ulp so 0 and 1 are never returned
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomSource::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

RandomSource RandomSource::substream(uint64_t id) const {
    return RandomSource(seed_, combine(stream_, id));
}

}  // namespace dblend
