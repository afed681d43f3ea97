#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rewardlab {

/// Mixes one 64-bit word (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stable seed-splitting hash: folds the parts into one 64-bit sub-seed.
/// Used to derive independent per-(environment, pair, role) streams from a
/// master seed, so batches can be generated in any order or in parallel.
inline std::uint64_t hash64(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x8AD1B3F059C82E4DULL;
    for (std::uint64_t p : parts) h = mix64(h ^ p);
    return h;
}

/// Deterministic random stream.
///
/// Wraps std::mt19937_64 (whose output sequence is pinned by the standard)
/// and derives doubles and Gaussians itself, so every sampled value is a pure
/// function of the seed. Gaussians use the Box-Muller transform on uniforms
/// taken as (word >> 11) * 2^-53, mapped into (0, 1].
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two words per pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // (0,1] for the log argument, [0,1) for the angle.
        double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
        double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Index sampled from an unnormalised nonnegative weight vector by
    /// inverse-CDF over the running sum. The last positive weight absorbs
    /// any rounding shortfall.
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        double acc = 0.0;
        int last_positive = 0;
        for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
            if (weights[i] > 0.0) last_positive = i;
            acc += weights[i];
            if (u < acc) return i;
        }
        return last_positive;
    }

    /// Index i in [0, n) with probability weights[offset + i], same contract
    /// as the vector overload but over a strided row of a flat buffer.
    int categorical_row(const double* row, int n) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += row[i];
        double u = uniform() * total;
        double acc = 0.0;
        int last_positive = 0;
        for (int i = 0; i < n; ++i) {
            if (row[i] > 0.0) last_positive = i;
            acc += row[i];
            if (u < acc) return i;
        }
        return last_positive;
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rewardlab
