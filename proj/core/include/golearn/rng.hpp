#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace golearn {

/// Identifies one reproducible random stream. The same (seed, stream_id)
/// always yields the same sequence of draws.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// Stream for item `index` of a batch: stream_id = batch_seed xor index.
    static RngStream for_index(std::uint64_t batch_seed, std::uint64_t index) {
        return {batch_seed, batch_seed ^ index};
    }

    /// Derive an independent child seed, e.g. one per training iteration.
    RngStream child(std::uint64_t tag) const;

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Standard-normal generator bound to an RngStream.
class NormalSource {
public:
    explicit NormalSource(RngStream stream);

    double operator()() { return normal_(engine_); }
    void fill(std::span<double> out) {
        for (double& v : out) v = normal_(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace golearn
