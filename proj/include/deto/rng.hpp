#ifndef DETO_RNG_HPP
#define DETO_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace deto {

/// Seeded random source with portable draw semantics. All sampling is done
/// from raw 64-bit outputs so that streams are reproducible across standard
/// library implementations (std::uniform_real_distribution makes no such
/// guarantee).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling keeps the draw unbiased.
    int uniform_int(int n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return static_cast<int>(v % bound);
    }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniformly random direction on the unit sphere in n dimensions.
    Eigen::VectorXd unit_vector(int n) {
        Eigen::VectorXd v(n);
        double norm = 0.0;
        do {
            for (int i = 0; i < n; ++i) v[i] = normal();
            norm = v.norm();
        } while (norm < 1e-12);
        return v / norm;
    }

    /// Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) std::swap(p[i], p[uniform_int(i + 1)]);
        return p;
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 finalizer; decorrelates structured seed material.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over a string; stable across platforms and library versions
/// (std::hash is not).
inline std::uint64_t hash64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stable run seed from experiment coordinates. Adding algorithms or
/// problems to a config never perturbs the seeds of existing runs.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view problem_id,
                                 std::string_view algorithm_id, int repetition) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ hash64(problem_id));
    h = mix64(h ^ hash64(algorithm_id));
    h = mix64(h ^ static_cast<std::uint64_t>(repetition));
    return h;
}

}  // namespace deto

#endif  // DETO_RNG_HPP
