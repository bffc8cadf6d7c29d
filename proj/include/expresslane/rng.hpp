#ifndef EXPRESSLANE_RNG_HPP
#define EXPRESSLANE_RNG_HPP

#include <cstdint>

namespace expresslane {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: draw k of stream `seed` is a pure function of
/// (seed, k), so results do not depend on platform or call interleaving.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)))
    {
    }

    std::uint64_t at(std::uint64_t k) const { return splitmix64(key_ + (k + 1) * 0x9e3779b97f4a7c15ULL); }
    std::uint64_t next() { return at(counter_++); }

    /// Uniform on [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform on [-1, 1).
    double symmetric() { return 2.0 * u01() - 1.0; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace expresslane

#endif
