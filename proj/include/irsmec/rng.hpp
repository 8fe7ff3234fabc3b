#ifndef IRSMEC_RNG_HPP
#define IRSMEC_RNG_HPP

#include <cstdint>
#include <random>

namespace irsmec {

/// splitmix64 mixing step; used to derive independent stream seeds from a
/// master seed without correlation between neighbouring seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream << 1 | 1));
}

/// Named sub-streams of one logical run. Keeping each physical quantity on
/// its own generator keeps draws aligned when an unrelated dimension (e.g.
/// the IRS element count) changes.
enum class Stream : std::uint64_t {
    Placement = 1,
    DirectFading = 2,
    IrsFading = 3,
    BsIrsFading = 4,
    Tasks = 5,
    Explore = 6,
    Replay = 7,
    Init = 8,
    Policy = 9,
    StateScale = 10,
};

inline std::mt19937_64 make_rng(std::uint64_t master, Stream s,
                                std::uint64_t index = 0) {
    return std::mt19937_64(
        derive_seed(derive_seed(master, static_cast<std::uint64_t>(s)), index));
}

/// Uniformly chosen k distinct indices from [0, n) (Floyd's algorithm).
template <class Rng>
inline std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                           std::size_t k,
                                                           Rng& rng) {
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t j = n - k; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> d(0, j);
        std::size_t t = d(rng);
        bool seen = false;
        for (std::size_t v : out)
            if (v == t) { seen = true; break; }
        out.push_back(seen ? j : t);
    }
    return out;
}

}  // namespace irsmec

#endif
