#include "golearn/rng.hpp"

#include <array>

namespace golearn {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream RngStream::child(std::uint64_t tag) const {
    return {mix64(seed ^ mix64(stream_id + 0x632be59bd9b4e019ULL * (tag + 1))), 0};
}

namespace {

std::mt19937_64 make_engine(RngStream s) {
    const std::array<std::uint32_t, 4> words{
        static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
        static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32)};
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

}  // namespace

NormalSource::NormalSource(RngStream stream) : engine_(make_engine(stream)) {}

}  // namespace golearn
