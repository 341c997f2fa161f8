#include "trcl/rng.hpp"

#include <vector>

namespace trcl {

std::mt19937_64 keyed_engine(std::initializer_list<std::uint64_t> key) {
    std::vector<std::uint32_t> words;
    words.reserve(key.size() * 2);
    for (std::uint64_t k : key) {
        words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

Vector standard_normal(std::mt19937_64& gen, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = normal(gen);
    return out;
}

}  // namespace trcl
