#pragma once

#include <cstdint>
#include <limits>
#include <utility>

namespace ksrg {

// SplitMix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_key(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }
inline std::uint64_t hash_key(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return hash_key(hash_key(a, b), c);
}
inline std::uint64_t hash_key(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return hash_key(hash_key(a, b, c), d);
}

// uniform in [0,1)
inline double to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }
// uniform in (0,1]
inline double to_unit_open0(std::uint64_t h) { return static_cast<double>((h >> 11) + 1) * 0x1.0p-53; }

// Stream purposes. Distinct salts keep the keyed draws independent.
enum Salt : std::uint64_t {
    kSaltCount = 0x636f756e74ULL,
    kSaltPos = 0x706f73ULL,
    kSaltMark = 0x6d61726bULL,
    kSaltCoin = 0x636f696eULL,
    kSaltBlock = 0x626c6f636bULL,
    kSaltPalm = 0x70616c6dULL,
    kSaltRep = 0x726570ULL,
    kSaltTrial = 0x747269616cULL,
};

// the Palm vertex's id; never produced by the vertex sampler
inline constexpr std::uint64_t kPalmId = std::numeric_limits<std::uint64_t>::max();

// Counter-based stream, usable with <random> distributions.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t seed) : s_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return mix64(s_ += 0x9e3779b97f4a7c15ULL); }
    double uniform() { return to_unit((*this)()); }
    double uniform_open0() { return to_unit_open0((*this)()); }

private:
    std::uint64_t s_;
};

inline std::uint64_t coin_key(std::uint64_t seed) { return hash_key(seed, kSaltCoin); }

// coin of the unordered pair {a, b}; key from coin_key
inline double edge_coin_keyed(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
    if (a > b) std::swap(a, b);
    return to_unit(mix64(mix64(key ^ a) ^ b));
}

inline double edge_coin(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return edge_coin_keyed(coin_key(seed), a, b);
}

}  // namespace ksrg
