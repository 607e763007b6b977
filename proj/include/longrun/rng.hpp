#pragma once

#include <array>
#include <cstdint>

namespace longrun {

/// Philox4x32-10 block function (Salmon et al., counter-based). Pure: the same
/// (counter, key) always yields the same four words on every platform.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// One reproducible random stream, identified by (seed, stream). Streams with
/// different ids never overlap: the stream id occupies the upper half of the counter.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Child stream for nested replication (e.g. inner loop j of outer replicate l).
    RngStream split(std::uint64_t child) const;

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    double normal();
    double exponential();
    /// Gamma(shape, 1) by Marsaglia-Tsang.
    double gamma(double shape);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace longrun
