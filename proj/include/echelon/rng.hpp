#ifndef ECHELON_RNG_HPP
#define ECHELON_RNG_HPP

#include <cstdint>

namespace echelon {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/*
    Cheap counter-less PRNG stream (splitmix64). Each stream remembers the
    seed it was built from, so substream(i) derives a stream that is stable
    no matter how many values were already drawn from the parent. One stream
    per trial, one substream per round; rejection sampling then cannot shift
    later rounds.
*/
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed) : root_(seed), state_(seed) {
        // decorrelate trivially related seeds (0,1,2,...)
        (void)splitmix64_next(state_);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ULL; }

    result_type operator()() { return splitmix64_next(state_); }

    RngStream substream(std::uint64_t index) const {
        std::uint64_t s = root_ ^ (0x632be59bd9b4e019ULL * (index + 1));
        return RngStream(s);
    }

    // uniform double in [0,1)
    double uniform01() { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }

    std::uint64_t root_seed() const { return root_; }

private:
    std::uint64_t root_;
    std::uint64_t state_;
};

} // namespace echelon

#endif // ECHELON_RNG_HPP
