#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace ddoc {

// Seeded random stream. Uniform doubles are derived from raw 64-bit draws
// (53 mantissa bits) so sequences are reproducible independent of the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Derive an independent stream for a named sub-purpose. Deterministic:
    // the same (seed, stream_id) always yields the same stream.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // Standard normal via Box-Muller on the portable uniform.
    double gaussian() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Eigen::VectorXd uniform_vector(int dim, double lo, double hi) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v(i) = uniform(lo, hi);
        return v;
    }

    Eigen::MatrixXd uniform_matrix(int rows, int cols, double lo, double hi) {
        Eigen::MatrixXd m(rows, cols);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < rows; ++i) m(i, j) = uniform(lo, hi);
        return m;
    }

    // Uniform on the Euclidean ball of the given radius.
    Eigen::VectorXd uniform_ball(int dim, double radius) {
        if (radius <= 0.0) return Eigen::VectorXd::Zero(dim);
        Eigen::VectorXd dir(dim);
        double norm = 0.0;
        do {
            for (int i = 0; i < dim; ++i) dir(i) = gaussian();
            norm = dir.norm();
        } while (norm == 0.0);
        const double r = radius * std::pow(uniform01(), 1.0 / dim);
        return dir * (r / norm);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ddoc
