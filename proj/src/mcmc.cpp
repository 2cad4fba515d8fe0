#include "curvwomb/mcmc.hpp"

#include "curvwomb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace curvwomb {

void PriorConfig::validate(Eigen::Index p) const {
    if (!(a_phi > 0.0 && a_phi < b_phi)) throw ConfigError("phi prior needs 0 < a_phi < b_phi");
    if (!(a_sigma > 0.0 && b_sigma > 0.0)) throw ConfigError("sigma2 prior shape and rate must be positive");
    if (!(a_tau > 0.0 && b_tau > 0.0)) throw ConfigError("tau2 prior shape and rate must be positive");
    if (mu_beta.size() != p || Sigma_beta.rows() != p || Sigma_beta.cols() != p)
        throw ConfigError("beta prior dimension does not match the design (p = " + std::to_string(p) + ")");
    Eigen::LLT<Mat> llt(Sigma_beta);
    if (llt.info() != Eigen::Success) throw ConfigError("Sigma_beta must be symmetric positive definite");
}

PriorConfig default_priors(const SpatialDataset& data, bool applications) {
    if (data.size() < 2) throw ConfigError("default priors need at least two locations");
    PriorConfig p;
    const double dmax = max_pairwise_distance(data.locations);
    if (!(dmax > 0.0)) throw ConfigError("all locations coincide");
    p.a_phi = 3.0 / dmax;
    p.b_phi = applications ? 300.0 : 30.0;
    p.a_sigma = 2.0;
    p.b_sigma = 1.0;
    p.a_tau = 2.0;
    p.b_tau = applications ? 1.0 : 0.1;
    const Eigen::Index k = data.n_covariates();
    p.mu_beta = Vec::Zero(k);
    p.Sigma_beta = 1e6 * Mat::Identity(k, k);
    return p;
}

void McmcSettings::validate() const {
    const int b = effective_burn_in();
    if (iters < 1) throw ConfigError("iters must be positive");
    if (b < 0 || b >= iters) throw ConfigError("need 0 <= burn_in < iters");
    if (thin < 1) throw ConfigError("thin must be at least 1");
    if (!(target_accept > 0.0 && target_accept < 1.0)) throw ConfigError("target_accept must lie in (0, 1)");
}

void PosteriorChains::validate() const {
    const Eigen::Index n = sigma2.size();
    if (n == 0) throw EmptySamples("chains contain no retained draws");
    if (tau2.size() != n || phi.size() != n || beta.rows() != n || Z.rows() != n)
        throw LengthMismatch("chain columns have inconsistent numbers of draws");
    if (Z.cols() != locations.rows()) throw LengthMismatch("Z width does not match the number of locations");
}

namespace {

class Sampler {
public:
    Sampler(const SpatialDataset& data, KernelFamily family, const PriorConfig& priors, const McmcSettings& settings)
        : data_(data), family_(family), priors_(priors), settings_(settings), rng_(settings.seed), L_(data.size()) {
        sigma_beta_inv_ = Cholesky(priors.Sigma_beta).solve(Mat::Identity(priors.Sigma_beta.rows(), priors.Sigma_beta.cols()));
        prior_beta_term_ = sigma_beta_inv_ * priors.mu_beta;
        xtx_ = data.X.transpose() * data.X;
    }

    PosteriorChains run() {
        initialize();
        const int burn = settings_.effective_burn_in();
        const Eigen::Index keep = (settings_.iters - burn + settings_.thin - 1) / settings_.thin;
        PosteriorChains out;
        out.family = family_;
        out.priors = priors_;
        out.seed = settings_.seed;
        out.iters = settings_.iters;
        out.burn_in = burn;
        out.thin = settings_.thin;
        out.locations = data_.locations;
        out.beta.resize(keep, data_.n_covariates());
        out.sigma2.resize(keep);
        out.tau2.resize(keep);
        out.phi.resize(keep);
        out.Z.resize(keep, L_);
        out.accept_rate.resize(keep);

        long accepted = 0;
        Eigen::Index row = 0;
        for (int it = 0; it < settings_.iters; ++it) {
            if (settings_.cancel && settings_.cancel->load(std::memory_order_relaxed)) throw Cancelled("fit cancelled");
            bool acc = false;
            if (settings_.block_beta_z) {
                if (settings_.update_tau2) update_tau2();
                if (settings_.update_sigma2) update_sigma2();
                acc = settings_.update_phi && update_phi();
                update_beta_z();
            } else {
                update_beta();
                if (settings_.update_tau2) update_tau2();
                update_z();
                if (settings_.update_sigma2) update_sigma2();
                acc = settings_.update_phi && update_phi();
            }
            accepted += acc ? 1 : 0;
            if (it < burn) adapt(acc, it);
            if (it >= burn && (it - burn) % settings_.thin == 0) {
                out.beta.row(row) = beta_.transpose();
                out.sigma2[row] = sigma2_;
                out.tau2[row] = tau2_;
                out.phi[row] = phi_;
                out.Z.row(row) = z_.transpose();
                out.accept_rate[row] = static_cast<double>(accepted) / (it + 1);
                ++row;
            }
        }
        return out;
    }

private:
    double normal() { return norm_(rng_); }
    Vec normal_vec(Eigen::Index n) {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }
    double inv_gamma(double shape, double rate) {
        std::gamma_distribution<double> g(shape, 1.0 / rate);
        return 1.0 / g(rng_);
    }

    void initialize() {
        const double a = priors_.a_phi, b = priors_.b_phi;
        phi_ = settings_.initial_phi > 0.0 ? settings_.initial_phi : std::sqrt(a * b);
        if (phi_ < a || phi_ > b) throw ConfigError("initial phi outside the prior support");
        Eigen::LDLT<Mat> ols(xtx_ + 1e-10 * Mat::Identity(xtx_.rows(), xtx_.cols()));
        beta_ = ols.solve(data_.X.transpose() * data_.y);
        const Vec resid = data_.y - data_.X * beta_;
        const double v = std::max(resid.squaredNorm() / static_cast<double>(L_), 1e-6);
        sigma2_ = settings_.initial_sigma2 > 0.0 ? settings_.initial_sigma2 : 0.5 * v;
        tau2_ = settings_.initial_tau2 > 0.0 ? settings_.initial_tau2 : 0.5 * v;
        z_ = Vec::Zero(L_);
        set_phi(phi_, build_chol(phi_));
    }

    struct Factored {
        Mat r;
        Cholesky chol;
    };

    Factored build_chol(double phi) const {
        Factored f{correlation_matrix(family_, phi, data_.locations), {}};
        f.chol = Cholesky(f.r);
        if (f.chol.jitter > 0.0) f.r.diagonal().array() += f.chol.jitter;
        return f;
    }

    void set_phi(double phi, Factored f) {
        phi_ = phi;
        r_ = std::move(f.r);
        r_chol_ = std::move(f.chol);
    }

    void update_beta() {
        const double inv_tau = 1.0 / tau2_;
        const Mat prec = sigma_beta_inv_ + inv_tau * xtx_;
        const Vec rhs = prior_beta_term_ + inv_tau * data_.X.transpose() * (data_.y - z_);
        Eigen::LLT<Mat> llt(prec);
        if (llt.info() != Eigen::Success) throw SingularCovariance("beta full-conditional precision is not SPD");
        const Vec mean = llt.solve(rhs);
        beta_ = mean + llt.matrixU().solve(normal_vec(mean.size()));
    }

    void update_tau2() {
        const double ss = (data_.y - data_.X * beta_ - z_).squaredNorm();
        tau2_ = inv_gamma(priors_.a_tau + 0.5 * L_, priors_.b_tau + 0.5 * ss);
    }

    Cholesky marginal_chol() const {
        Mat a = sigma2_ * r_;
        a.diagonal().array() += tau2_;
        return Cholesky(a);
    }

    // Exact draw from Z | y, beta, sigma2, tau2, phi by perturbing a prior
    // draw (same Gaussian as the closed-form full conditional).
    void update_z(const Cholesky& marginal) {
        const Vec r = data_.y - data_.X * beta_;
        const Vec z0 = std::sqrt(sigma2_) * Vec(r_chol_.llt.matrixL() * normal_vec(L_));
        const Vec e0 = std::sqrt(tau2_) * normal_vec(L_);
        z_ = z0 + sigma2_ * (r_ * marginal.solve(Vec(r - z0 - e0)));
    }
    void update_z() { update_z(marginal_chol()); }

    // beta | y, theta with Z integrated out, then Z | beta, y, theta: a joint
    // draw of (beta, Z) that avoids the slow beta/Z Gibbs coupling.
    void update_beta_z() {
        const Cholesky marginal = marginal_chol();
        const Mat ax = marginal.solve(data_.X);
        const Mat prec = sigma_beta_inv_ + data_.X.transpose() * ax;
        const Vec rhs = prior_beta_term_ + ax.transpose() * data_.y;
        Eigen::LLT<Mat> llt(prec);
        if (llt.info() != Eigen::Success) throw SingularCovariance("beta marginal precision is not SPD");
        const Vec mean = llt.solve(rhs);
        beta_ = mean + llt.matrixU().solve(normal_vec(mean.size()));
        update_z(marginal);
    }

    double quad_form_r(const Cholesky& chol, const Vec& z) const {
        return chol.llt.matrixL().solve(z).squaredNorm();
    }

    void update_sigma2() {
        sigma2_ = inv_gamma(priors_.a_sigma + 0.5 * L_, priors_.b_sigma + 0.5 * quad_form_r(r_chol_, z_));
    }

    double log_target(const Cholesky& chol, double phi) const {
        return -0.5 * chol.log_det() - 0.5 * quad_form_r(chol, z_) / sigma2_ + std::log(phi);
    }

    bool update_phi() {
        const double proposal = phi_ * std::exp(step_ * normal());
        const double u = unif_(rng_);
        if (proposal < priors_.a_phi || proposal > priors_.b_phi) return false;
        Factored prop;
        try {
            prop = build_chol(proposal);
        } catch (const SingularCovariance&) {
            return false;
        }
        const double log_ratio = log_target(prop.chol, proposal) - log_target(r_chol_, phi_);
        if (std::log(u) < log_ratio) {
            set_phi(proposal, std::move(prop));
            return true;
        }
        return false;
    }

    // Robbins-Monro on the log proposal scale; only called during burn-in.
    void adapt(bool accepted, int it) {
        const double gain = std::min(1.0, 5.0 / std::pow(it + 1.0, 0.6));
        const double next = std::log(step_) + gain * ((accepted ? 1.0 : 0.0) - settings_.target_accept);
        step_ = std::exp(std::clamp(next, -10.0, 3.0));
    }

    const SpatialDataset& data_;
    KernelFamily family_;
    const PriorConfig& priors_;
    const McmcSettings& settings_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> norm_{0.0, 1.0};
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    Eigen::Index L_;

    Mat sigma_beta_inv_;
    Vec prior_beta_term_;
    Mat xtx_;

    Vec beta_;
    double sigma2_{1}, tau2_{1}, phi_{1};
    Vec z_;
    Mat r_;
    Cholesky r_chol_;
    double step_{0.3};
};

}  // namespace

PosteriorChains fit(const SpatialDataset& data, KernelFamily family, const PriorConfig& priors, const McmcSettings& settings) {
    data.validate();
    priors.validate(data.n_covariates());
    settings.validate();
    return Sampler(data, family, priors, settings).run();
}

double log_joint_density(const SpatialDataset& data, const PosteriorChains& chains, Eigen::Index draw) {
    const auto L = static_cast<double>(data.size());
    const double s2 = chains.sigma2[draw], t2 = chains.tau2[draw], phi = chains.phi[draw];
    const Vec beta = chains.beta.row(draw).transpose();
    const Vec z = chains.Z.row(draw).transpose();
    const PriorConfig& p = chains.priors;
    constexpr double log2pi = 1.8378770664093454836;

    double lp = -0.5 * L * (log2pi + std::log(t2)) - 0.5 * (data.y - data.X * beta - z).squaredNorm() / t2;
    const Cholesky rc(correlation_matrix(chains.family, phi, data.locations));
    lp += -0.5 * L * (log2pi + std::log(s2)) - 0.5 * rc.log_det() - 0.5 * rc.solve_lower(z).squaredNorm() / s2;
    const Cholesky bc(p.Sigma_beta);
    lp += -0.5 * bc.log_det() - 0.5 * bc.solve_lower(Vec(beta - p.mu_beta)).squaredNorm();
    auto log_ig = [](double x, double a, double b) { return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x; };
    lp += log_ig(s2, p.a_sigma, p.b_sigma) + log_ig(t2, p.a_tau, p.b_tau);
    lp += (phi >= p.a_phi && phi <= p.b_phi) ? -std::log(p.b_phi - p.a_phi) : -std::numeric_limits<double>::infinity();
    return lp;
}

}  // namespace curvwomb
