#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "hpmab/hawkes.hpp"

namespace hpmab {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Gamma(k_p, k_c) priors (shape/scale) on mu and beta, Beta(m, n) on alpha.
struct PriorConfig {
    double k_p = 1.0;
    double k_c = 1.0;
    double m = 2.0;
    double n = 2.0;

    void validate() const {
        if (!(k_p > 0.0) || !(k_c > 0.0) || !(m > 0.0) || !(n > 0.0)) {
            throw std::invalid_argument("PriorConfig: all hyperparameters must be > 0");
        }
    }

    [[nodiscard]] double log_gamma_pdf(double x) const {
        if (!(x > 0.0)) {
            return kNegInf;
        }
        return (k_p - 1.0) * std::log(x) - x / k_c - std::lgamma(k_p) - k_p * std::log(k_c);
    }

    [[nodiscard]] double log_beta_pdf(double a) const {
        if (!(a > 0.0) || !(a < 1.0)) {
            return kNegInf;
        }
        const double log_b = std::lgamma(m) + std::lgamma(n) - std::lgamma(m + n);
        return (m - 1.0) * std::log(a) + (n - 1.0) * std::log1p(-a) - log_b;
    }

    [[nodiscard]] double log_prior(const HawkesParams& p) const {
        if (!p.in_support()) {
            return kNegInf;
        }
        return log_gamma_pdf(p.mu) + log_beta_pdf(p.alpha) + log_gamma_pdf(p.beta);
    }
};

struct MHConfig {
    int num_samples = 50;                           // posterior samples kept (L)
    int burn_in = 500;                              // discarded initial steps
    int thin = 5;                                   // keep every thin-th step
    std::array<double, 3> proposal_scales{0.5, 0.5, 0.5}; // log mu, logit alpha, log beta
    bool adapt_during_burn_in = true;               // multiplicative scale tuning, frozen after
    double target_acceptance = 0.3;

    void validate() const {
        if (num_samples < 1 || burn_in < 0 || thin < 1) {
            throw std::invalid_argument("MHConfig: need num_samples >= 1, burn_in >= 0, thin >= 1");
        }
        for (double s : proposal_scales) {
            if (!(s >= 0.0)) {
                throw std::invalid_argument("MHConfig: proposal scales must be >= 0");
            }
        }
    }
};

struct MhDiagnostics {
    double acceptance_rate = 0.0;
    std::size_t chain_length = 0;
    bool stuck = false; // no proposal was ever accepted
};

struct PosteriorSamples {
    std::vector<HawkesParams> samples;
    MhDiagnostics diagnostics;
};

/// Random-walk Metropolis over R^d with optional multiplicative scale
/// adaptation during burn-in (Robbins-Monro toward the target acceptance,
/// frozen once sampling starts). `log_target` must already include any
/// change-of-variables Jacobian.
template <typename LogTarget>
std::vector<std::vector<double>> random_walk_mh(LogTarget&& log_target,
                                                std::vector<double> state,
                                                std::vector<double> scales,
                                                const MHConfig& cfg, std::mt19937_64& rng,
                                                MhDiagnostics* diag = nullptr) {
    cfg.validate();
    if (state.size() != scales.size() || state.empty()) {
        throw std::invalid_argument("random_walk_mh: state/scales size mismatch");
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    double current_lp = log_target(state);
    if (!std::isfinite(current_lp)) {
        throw std::invalid_argument("random_walk_mh: initial state has non-finite target");
    }

    const std::size_t total_steps =
        static_cast<std::size_t>(cfg.burn_in) +
        static_cast<std::size_t>(cfg.num_samples) * static_cast<std::size_t>(cfg.thin);
    std::vector<std::vector<double>> kept;
    kept.reserve(static_cast<std::size_t>(cfg.num_samples));
    std::vector<double> proposal(state.size());
    std::size_t accepted = 0;

    for (std::size_t step = 0; step < total_steps; ++step) {
        for (std::size_t d = 0; d < state.size(); ++d) {
            proposal[d] = state[d] + scales[d] * gauss(rng);
        }
        const double prop_lp = log_target(proposal);
        const double log_u = std::log(unif(rng));
        const bool accept = std::isfinite(prop_lp) && log_u <= prop_lp - current_lp;
        if (accept) {
            state = proposal;
            current_lp = prop_lp;
            ++accepted;
        }
        if (cfg.adapt_during_burn_in && step < static_cast<std::size_t>(cfg.burn_in)) {
            const double gain = 1.0 / std::pow(static_cast<double>(step) + 1.0, 0.6);
            const double factor =
                std::exp(gain * ((accept ? 1.0 : 0.0) - cfg.target_acceptance));
            for (double& s : scales) {
                s *= factor;
            }
        }
        if (step >= static_cast<std::size_t>(cfg.burn_in) &&
            (step - static_cast<std::size_t>(cfg.burn_in) + 1) %
                    static_cast<std::size_t>(cfg.thin) ==
                0) {
            kept.push_back(state);
        }
    }
    if (diag != nullptr) {
        diag->acceptance_rate =
            total_steps == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(total_steps);
        diag->chain_length = total_steps;
        diag->stuck = accepted == 0;
    }
    return kept;
}

namespace detail {

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline HawkesParams params_from_transformed(const std::vector<double>& z) {
    return HawkesParams{std::exp(z[0]), expit(z[1]), std::exp(z[2])};
}

} // namespace detail

/// Unnormalized log posterior density: log prior + log likelihood on
/// [horizon.start, horizon.end]. Outside the support returns -inf.
inline double log_posterior(const HawkesParams& params, const EventSeq& events,
                            const TimeWindow& horizon, const PriorConfig& priors) {
    priors.validate();
    if (!params.in_support()) {
        return kNegInf;
    }
    return priors.log_prior(params) + log_likelihood(params, events, horizon);
}

/// Draws L posterior samples by random-walk Metropolis-Hastings in
/// transformed space (log mu, logit alpha, log beta); the Jacobian of the
/// transform is included in the target so support constraints never truncate
/// proposals.
inline PosteriorSamples mh_sample(const EventSeq& events, const TimeWindow& horizon,
                                  const PriorConfig& priors, const MHConfig& cfg,
                                  std::mt19937_64& rng) {
    priors.validate();
    cfg.validate();
    horizon.validate();
    if (!events.empty() && (events.front() < horizon.start || events.back() > horizon.end)) {
        throw std::invalid_argument("mh_sample: horizon must cover all events");
    }

    auto log_target = [&](const std::vector<double>& z) {
        const HawkesParams p = detail::params_from_transformed(z);
        if (!p.in_support()) {
            return kNegInf;
        }
        // Jacobian: dmu/dz0 = mu, dalpha/dz1 = alpha(1-alpha), dbeta/dz2 = beta
        const double log_jac =
            z[0] + std::log(p.alpha) + std::log1p(-p.alpha) + z[2];
        return log_posterior(p, events, horizon, priors) + log_jac;
    };

    const double span = horizon.length();
    double mu0 = events.empty() || span <= 0.0
                     ? priors.k_p * priors.k_c
                     : static_cast<double>(events.size()) / span;
    if (!(mu0 > 0.0) || !std::isfinite(mu0)) {
        mu0 = priors.k_p * priors.k_c;
    }
    const std::vector<double> init{std::log(mu0), detail::logit(0.5), std::log(1.0)};
    const std::vector<double> scales(cfg.proposal_scales.begin(), cfg.proposal_scales.end());

    PosteriorSamples out;
    const auto chain = random_walk_mh(log_target, init, scales, cfg, rng, &out.diagnostics);
    out.samples.reserve(chain.size());
    for (const auto& z : chain) {
        out.samples.push_back(detail::params_from_transformed(z));
    }
    return out;
}

/// Direct draws from the prior (used to initialize never-visited cells; MH on
/// empty data over a near-zero horizon reduces to this).
inline std::vector<HawkesParams> sample_prior(const PriorConfig& priors, int count,
                                              std::mt19937_64& rng) {
    priors.validate();
    if (count < 0) {
        throw std::invalid_argument("sample_prior: count must be >= 0");
    }
    std::gamma_distribution<double> gamma(priors.k_p, priors.k_c);
    std::gamma_distribution<double> beta_m(priors.m, 1.0);
    std::gamma_distribution<double> beta_n(priors.n, 1.0);
    std::vector<HawkesParams> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        HawkesParams p;
        do {
            p.mu = gamma(rng);
            const double a = beta_m(rng);
            const double b = beta_n(rng);
            p.alpha = a / (a + b);
            p.beta = gamma(rng);
        } while (!p.in_support());
        out.push_back(p);
    }
    return out;
}

} // namespace hpmab
