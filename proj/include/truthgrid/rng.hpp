#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace truthgrid {

// Derives independent substream seeds from one master seed by absorbing
// tagged tokens (FNV-1a over bytes, splitmix64 finalizer). Every random
// decision in the library is keyed this way, so results are independent of
// iteration order.
class SeedMix {
public:
    explicit SeedMix(uint64_t base);
    SeedMix& mix(uint64_t v);
    SeedMix& mix(std::string_view s);
    uint64_t value() const;

private:
    uint64_t h_;
};

template <class... Parts>
uint64_t seed_mix(uint64_t base, Parts&&... parts) {
    SeedMix s(base);
    (s.mix(parts), ...);
    return s.value();
}

// mt19937_64 with hand-rolled draws: std:: distributions are not bit-stable
// across standard libraries, and reruns must be byte-identical.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }
    double uniform01();            // [0, 1)
    uint64_t bounded(uint64_t n);  // [0, n), rejection sampled
    bool bernoulli(double p) { return uniform01() < p; }

    // k distinct indices from [0, n), returned sorted.
    std::vector<uint32_t> sample(uint32_t n, uint32_t k);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[bounded(i)]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace truthgrid
