#pragma once

#include <cstdint>

namespace torswitch {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the k-th draw of a stream is a pure function of
/// (key, k), so streams can be split by index without shared state.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    /// Independent stream for work item `index` under `master_seed`.
    static constexpr CounterRng stream(std::uint64_t master_seed, std::uint64_t index) {
        return CounterRng(mix64(master_seed ^ mix64(index)));
    }

    constexpr std::uint64_t next() { return mix64(key_ + (++counter_) * 0xd1b54a32d192ed03ULL); }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    constexpr double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    constexpr std::uint64_t counter() const { return counter_; }
    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace torswitch
