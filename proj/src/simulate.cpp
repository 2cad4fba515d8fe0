#include "curvwomb/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace curvwomb {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kW = 3.0 * kPi;
}  // namespace

PatternOracle::PatternOracle(int pattern_id, double noise_variance) : id(pattern_id), tau2(noise_variance) {
    if (id != 1 && id != 2) throw ConfigError("pattern must be 1 or 2, got " + std::to_string(id));
    if (!(tau2 >= 0.0)) throw ConfigError("noise variance must be nonnegative");
}

double PatternOracle::mean(const Vec2& s) const {
    if (id == 1) return 10.0 * (std::sin(kW * s[0]) + std::cos(kW * s[1]));
    return 10.0 * std::sin(kW * s[0]) * std::cos(kW * s[1]);
}

SurfaceDerivatives PatternOracle::derivatives(const Vec2& s) const {
    const double sa = std::sin(kW * s[0]), ca = std::cos(kW * s[0]);
    const double sb = std::sin(kW * s[1]), cb = std::cos(kW * s[1]);
    const double c1 = 10.0 * kW, c2 = 10.0 * kW * kW, c3 = 10.0 * kW * kW * kW;
    SurfaceDerivatives d;
    if (id == 1) {
        d.value = 10.0 * (sa + cb);
        d.grad = {c1 * ca, -c1 * sb};
        d.hess = {-c2 * sa, 0.0, -c2 * cb};
        d.third = {-c3 * ca, 0.0, 0.0, c3 * sb};
    } else {
        d.value = 10.0 * sa * cb;
        d.grad = {c1 * ca * cb, -c1 * sa * sb};
        d.hess = {-c2 * sa * cb, -c2 * ca * sb, -c2 * sa * cb};
        d.third = {-c3 * ca * cb, c3 * sa * sb, -c3 * ca * cb, c3 * sa * sb};
    }
    return d;
}

SpatialDataset generate(const PatternOracle& pattern, int L, std::uint64_t seed) {
    if (L < 1) throw ConfigError("L must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);
    SpatialDataset d;
    d.locations.resize(L, 2);
    d.X = Mat::Ones(L, 1);
    d.y.resize(L);
    const double sd = std::sqrt(pattern.tau2);
    for (int i = 0; i < L; ++i) {
        d.locations(i, 0) = unif(rng);
        d.locations(i, 1) = unif(rng);
    }
    for (int i = 0; i < L; ++i) d.y[i] = pattern.mean(d.locations.row(i).transpose()) + sd * norm(rng);
    return d;
}

Mat lattice(int n, double lo, double hi) {
    if (n < 1) throw ConfigError("lattice size must be positive");
    Mat g(n * n, 2);
    const double step = n > 1 ? (hi - lo) / (n - 1) : 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            g(j * n + i, 0) = lo + i * step;
            g(j * n + i, 1) = lo + j * step;
        }
    return g;
}

}  // namespace curvwomb
