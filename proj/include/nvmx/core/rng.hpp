#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace nvmx {

// Counter-based pseudo-random stream.
//
// Each draw hashes (key, counter) through the splitmix64 finalizer, so a
// stream is defined entirely by its 64-bit key. Independent streams are
// derived by hashing tags into the key (child()), which makes sampling
// order-independent: give every site/frame/pixel its own stream and the
// result no longer depends on loop order or thread scheduling.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    static RngStream root(std::uint64_t seed) {
        return RngStream(mix64(seed ^ 0x6a09e667f3bcc908ull));
    }

    // Derive an independent stream. Children with distinct tags, and the
    // parent itself, produce unrelated sequences.
    RngStream child(std::uint64_t tag) const {
        return RngStream(mix64(key_ ^ mix64(tag + 0x9e3779b97f4a7c15ull)));
    }
    RngStream child(std::uint64_t a, std::uint64_t b) const {
        return child(a).child(b);
    }
    RngStream child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
        return child(a).child(b).child(c);
    }

    std::uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ull;
        return mix64(key_ ^ counter_);
    }

    // [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // (0, 1], safe to pass to log().
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential() { return -std::log(uniform_pos()); }

    // Box-Muller; the second member of the pair is discarded so each call
    // consumes exactly two uniforms regardless of history.
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Exact Poisson sampling. CDF inversion walks at most a few dozen terms
    // for the rates seen here; larger rates split additively, which preserves
    // the distribution exactly.
    std::uint64_t poisson(double lambda) {
        if (!(lambda >= 0.0)) throw std::invalid_argument("poisson: lambda must be >= 0");
        if (lambda == 0.0) return 0;
        if (lambda > 60.0) {
            double half = 0.5 * lambda;
            return poisson(half) + poisson(lambda - half);
        }
        double u = uniform();
        double p = std::exp(-lambda);
        double cum = p;
        std::uint64_t k = 0;
        while (u > cum && k < 400) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

    // Marsaglia-Tsang squeeze for shape >= 1, boosted below 1.
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0))
            throw std::invalid_argument("gamma: shape and scale must be > 0");
        if (shape < 1.0) {
            double u = uniform_pos();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform_pos();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
        }
    }

    std::uint64_t key() const { return key_; }

    static constexpr std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace nvmx
