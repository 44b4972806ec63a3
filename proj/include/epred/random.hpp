#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace epred {

/// Seeded generator whose output is identical on every platform (the
/// std distributions are implementation-defined, so none are used).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t index(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

    Eigen::VectorXd vector(int n, double scale = 1.0) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = uniform(-scale, scale);
        return v;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace epred
