#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mdag {

// Counter-free xoshiro256** generator with named substreams.
//
// All randomness in the library flows from one master seed; independent
// streams are derived by hashing (seed, tag) where the tag encodes e.g.
// (node, replication). Identical tags give identical streams, which is what
// makes datasets bit-reproducible and lets scenarios share complete data.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& lane : state_) lane = splitmix64(x);
    }

    // Derive a generator for a named substream of `seed`.
    static Rng substream(uint64_t seed, std::string_view tag) {
        uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the tag
        for (unsigned char c : tag) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        uint64_t x = seed ^ h;
        x = splitmix64(x) ^ (h + 0x9e3779b97f4a7c15ull);
        return Rng(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0,1); never returns 0 or 1 exactly.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Box-Muller; two uniforms per draw, no cached state.
    double normal(double mu, double sigma) {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * r * std::cos(6.283185307179586476925287 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Knuth's product method; fine for the small lambdas used here.
    int poisson(double lambda) {
        double limit = std::exp(-lambda);
        double prod = uniform();
        int k = 0;
        while (prod > limit) {
            prod *= uniform();
            ++k;
        }
        return k;
    }

    // Returns an index in [0, probs.size()); probs must sum to ~1.
    int categorical(std::span<const double> probs) {
        double u = uniform();
        double acc = 0.0;
        for (size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    size_t index(size_t n) { return static_cast<size_t>(next_u64() % n); }

private:
    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t state_[4];
};

// Builds "a|b|c"-style stream tags.
inline std::string stream_tag(std::initializer_list<std::string_view> parts) {
    std::string out;
    for (auto p : parts) {
        if (!out.empty()) out.push_back('|');
        out.append(p);
    }
    return out;
}

}  // namespace mdag
