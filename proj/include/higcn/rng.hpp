#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace higcn {

// Counter-based generator: the n-th draw of stream (seed, stream) is a fixed
// function of (seed, stream, n), computed with the SplitMix64 finalizer. No
// platform-dependent std:: distributions are involved, so streams are identical
// everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    std::uint64_t next_u64() noexcept;

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;

    bool bernoulli(double p) noexcept { return uniform() < p; }

    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace higcn
