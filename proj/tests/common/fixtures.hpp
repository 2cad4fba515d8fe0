#pragma once

#include "curvwomb/mcmc.hpp"

#include <random>

namespace fixture {

using namespace curvwomb;

/// Chains with fixed hyperparameters and the given latent draws.
inline PosteriorChains constant_chains(KernelFamily family, const Mat& locations, const Mat& Z, double sigma2, double phi) {
    PosteriorChains c;
    c.family = family;
    c.locations = locations;
    const Eigen::Index n = Z.rows();
    c.Z = Z;
    c.beta = Mat::Zero(n, 1);
    c.sigma2 = Vec::Constant(n, sigma2);
    c.tau2 = Vec::Constant(n, 0.1);
    c.phi = Vec::Constant(n, phi);
    c.accept_rate = Vec::Constant(n, 0.4);
    c.iters = static_cast<int>(n);
    c.priors.a_phi = 0.1;
    c.priors.mu_beta = Vec::Zero(1);
    c.priors.Sigma_beta = Mat::Identity(1, 1);
    return c;
}

inline Mat uniform_locations(int L, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mat m(L, 2);
    for (int i = 0; i < L; ++i) m.row(i) << u(rng), u(rng);
    return m;
}

}  // namespace fixture
