#include "truthgrid/rng.hpp"

#include <algorithm>
#include <numeric>

namespace truthgrid {

namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

uint64_t fnv_byte(uint64_t h, unsigned char b) { return (h ^ b) * kFnvPrime; }

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

SeedMix::SeedMix(uint64_t base) : h_(kFnvOffset) { mix(base); }

SeedMix& SeedMix::mix(uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h_ = fnv_byte(h_, static_cast<unsigned char>(v >> (8 * i)));
    }
    h_ = fnv_byte(h_, 0xfe);  // token separator
    return *this;
}

SeedMix& SeedMix::mix(std::string_view s) {
    for (unsigned char c : s) h_ = fnv_byte(h_, c);
    h_ = fnv_byte(h_, 0xff);
    return *this;
}

uint64_t SeedMix::value() const { return splitmix64(h_); }

double Rng::uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

uint64_t Rng::bounded(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

std::vector<uint32_t> Rng::sample(uint32_t n, uint32_t k) {
    std::vector<uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (uint32_t i = 0; i < k; ++i) {
        const uint32_t j = i + static_cast<uint32_t>(bounded(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace truthgrid
