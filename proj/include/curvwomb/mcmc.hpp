#pragma once

#include "curvwomb/dataset.hpp"
#include "curvwomb/kernels.hpp"

#include <atomic>
#include <cstdint>
#include <optional>
#include <vector>

namespace curvwomb {

struct PriorConfig {
    double a_phi{0.0}, b_phi{30.0};
    double a_sigma{2.0}, b_sigma{1.0};
    double a_tau{2.0}, b_tau{0.1};
    Vec mu_beta;
    Mat Sigma_beta;

    /// Throws ConfigError.
    void validate(Eigen::Index p) const;
};

/// Weakly informative defaults: a_phi = 3 / max ||Delta||, b_phi = 30,
/// IG(2, 1) on sigma2, IG(2, 0.1) on tau2, beta ~ N(0, 1e6 I). The
/// `applications` variant widens b_phi to 300 and b_tau to 1.
[[nodiscard]] PriorConfig default_priors(const SpatialDataset& data, bool applications = false);

struct McmcSettings {
    int iters{10000};
    std::optional<int> burn_in;  // defaults to iters / 2
    int thin{1};
    std::uint64_t seed{1};
    double target_accept{0.44};
    double initial_phi{0.0};  // <= 0: geometric midpoint of the prior bounds
    double initial_sigma2{0.0};  // <= 0: half the OLS residual variance
    double initial_tau2{0.0};    // <= 0: half the OLS residual variance
    // Holding a parameter at its initial value (used for conditional checks).
    bool update_sigma2{true};
    bool update_tau2{true};
    bool update_phi{true};
    // Draw (beta, Z) as one block with Z integrated out of the beta step.
    // When false, beta | Z and Z | beta are alternated.
    bool block_beta_z{true};
    // Polled once per iteration; when it becomes true fit() throws Cancelled.
    const std::atomic<bool>* cancel{nullptr};

    [[nodiscard]] int effective_burn_in() const { return burn_in.value_or(iters / 2); }
    void validate() const;
};

/// Retained posterior draws, one row per draw.
struct PosteriorChains {
    KernelFamily family{KernelFamily::Matern52};
    PriorConfig priors;
    std::uint64_t seed{0};
    int iters{0};
    int burn_in{0};
    int thin{1};
    Mat locations;  // L x 2, needed to condition on Z

    Mat beta;    // n x p
    Vec sigma2;  // n
    Vec tau2;    // n
    Vec phi;     // n
    Mat Z;       // n x L
    Vec accept_rate;  // running phi acceptance rate at each retained draw

    [[nodiscard]] Eigen::Index n_draws() const { return sigma2.size(); }
    [[nodiscard]] Eigen::Index n_locations() const { return locations.rows(); }
    [[nodiscard]] KernelSpec kernel(Eigen::Index draw) const { return {family, sigma2[draw], phi[draw]}; }
    /// Throws EmptySamples or LengthMismatch.
    void validate() const;
};

/// Gibbs sampler for Y = X beta + Z + eps with Z ~ GP(0, sigma2 R(phi)),
/// eps ~ N(0, tau2 I), with a log-scale adaptive Metropolis step for phi.
[[nodiscard]] PosteriorChains fit(const SpatialDataset& data, KernelFamily family, const PriorConfig& priors,
                                  const McmcSettings& settings);

/// Log of the unnormalized joint posterior density at one retained draw.
[[nodiscard]] double log_joint_density(const SpatialDataset& data, const PosteriorChains& chains, Eigen::Index draw);

}  // namespace curvwomb
