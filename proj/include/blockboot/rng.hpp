#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace blockboot {

/**
 * @brief Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
 * as easy as 1, 2, 3").
 *
 * Counter-based: the output depends only on (counter, key), so any position of
 * any stream can be computed without touching the others.
 */
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

[[nodiscard]] PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// SplitMix64 finalizer, used to derive child seeds.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Child seed for a labelled sub-task. Chain calls to build a seed hierarchy.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/**
 * @brief Random stream keyed by (seed, stream id).
 *
 * The 64-bit seed is the Philox key; the stream id occupies the upper half of
 * the 128-bit counter and the draw position the lower half. Two streams with
 * different (seed, stream id) never share a counter value.
 *
 * Normals use Box-Muller on two 53-bit uniforms; both variates are used.
 */
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    [[nodiscard]] std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform() noexcept;

    /// Uniform on (0, 1).
    [[nodiscard]] double uniform_open() noexcept;

    [[nodiscard]] double normal() noexcept;

    /// Uniform integer on [0, bound). bound must be positive.
    [[nodiscard]] std::uint64_t below(std::uint64_t bound) noexcept;

private:
    void refill() noexcept;

    PhiloxKey key_;
    std::uint64_t stream_id_;
    std::uint64_t position_ = 0;
    PhiloxCounter buffer_{};
    unsigned used_ = 4;
    std::optional<double> spare_normal_;
};

}  // namespace blockboot
