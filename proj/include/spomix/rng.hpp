#pragma once

#include <cstdint>
#include <initializer_list>

namespace spomix {

/// SplitMix64: a counter-based 64-bit generator (Steele, Lea & Flood 2014,
/// "Fast splittable pseudorandom number generators"). Output i of a stream
/// with seed s is mix(s + (i+1)*GAMMA), so streams are pure functions of
/// (seed, counter) and identical on every platform. Used for all synthetic
/// sampling so CSV fixtures reproduce byte-for-byte.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Derives an independent child seed from a list of key words by chaining
    /// the finalizer. Adding unrelated keys elsewhere never perturbs an
    /// existing (key list -> stream) assignment, which is what lets a sweep
    /// grid grow without changing the streams of existing grid points.
    static std::uint64_t derive(std::initializer_list<std::uint64_t> words) {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (std::uint64_t w : words) {
            h = mix(h ^ (w + kGamma));
        }
        return h;
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t state_;
};

} // namespace spomix
