#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpmab/bayes.hpp"
#include "hpmab/environment.hpp"
#include "hpmab/random.hpp"
#include "hpmab/spatial.hpp"
#include "hpmab/tracker.hpp"

namespace hpmab {

enum class PolicyKind {
    eps_greedy,
    ucb1,
    spucb,
    ucb1_hp,
    ucb1_hpsp,
    hpspucb,
};

inline const char* to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::eps_greedy: return "eps_greedy";
    case PolicyKind::ucb1: return "ucb1";
    case PolicyKind::spucb: return "spucb";
    case PolicyKind::ucb1_hp: return "ucb1_hp";
    case PolicyKind::ucb1_hpsp: return "ucb1_hpsp";
    case PolicyKind::hpspucb: return "hpspucb";
    }
    return "unknown";
}

inline PolicyKind policy_kind_from_string(const std::string& name) {
    for (PolicyKind k : {PolicyKind::eps_greedy, PolicyKind::ucb1, PolicyKind::spucb,
                         PolicyKind::ucb1_hp, PolicyKind::ucb1_hpsp, PolicyKind::hpspucb}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown policy kind: " + name);
}

inline bool policy_uses_tracker(PolicyKind k) {
    return k == PolicyKind::ucb1_hp || k == PolicyKind::ucb1_hpsp || k == PolicyKind::hpspucb;
}

inline bool policy_uses_gp(PolicyKind k) {
    return k == PolicyKind::spucb || k == PolicyKind::hpspucb;
}

struct PolicyConfig {
    double epsilon = 0.1; // eps_greedy explore probability
    double zeta_ucb = 1.0;
    double zeta_gp = 1.0;
    double tau_gp = 1.0;
    double sigma_gp = 1.0;
    double gamma = 1.0;
    double tau = 1.0;
    double zeta_hp = 1.0;
    double gp_jitter = 1e-6;
    int N = 5; // cells per visit

    void validate(int n_cells) const {
        if (epsilon < 0.0 || epsilon > 1.0) {
            throw std::invalid_argument("PolicyConfig: epsilon must be in [0, 1]");
        }
        if (!(tau > 0.0) || !(tau_gp > 0.0)) {
            throw std::invalid_argument("PolicyConfig: tau and tau_gp must be > 0");
        }
        if (gamma < 0.0 || zeta_ucb < 0.0 || zeta_gp < 0.0 || zeta_hp < 0.0) {
            throw std::invalid_argument("PolicyConfig: gamma and zeta_* must be >= 0");
        }
        if (!(sigma_gp >= 0.0) || !(gp_jitter >= 0.0)) {
            throw std::invalid_argument("PolicyConfig: sigma_gp and gp_jitter must be >= 0");
        }
        if (N < 1 || N > n_cells) {
            throw std::invalid_argument("PolicyConfig: need 1 <= N <= number of cells");
        }
    }
};

/// Per-cell visit counts and rewards plus the global round counter.
struct RewardLedger {
    int rounds = 0;
    std::vector<int> visit_count;
    std::vector<double> cum_reward;

    explicit RewardLedger(int n_cells = 0)
        : visit_count(static_cast<std::size_t>(n_cells), 0),
          cum_reward(static_cast<std::size_t>(n_cells), 0.0) {}

    void record(int cell, double reward) {
        visit_count.at(static_cast<std::size_t>(cell)) += 1;
        cum_reward.at(static_cast<std::size_t>(cell)) += reward;
    }

    [[nodiscard]] double mean_reward(int cell) const {
        const int n = visit_count.at(static_cast<std::size_t>(cell));
        return n == 0 ? 0.0 : cum_reward[static_cast<std::size_t>(cell)] / n;
    }

    [[nodiscard]] double total_reward() const {
        return std::accumulate(cum_reward.begin(), cum_reward.end(), 0.0);
    }
};

/// UCB1 scores r_bar + zeta * sqrt(2 ln v / n); unvisited cells get +inf so
/// every reachable cell is tried once.
inline ScoreField ucb1_scores(const RewardLedger& ledger, double zeta_ucb, int grid_x,
                              int grid_y) {
    if (ledger.rounds < 1) {
        throw std::invalid_argument("ucb1_scores: need at least one completed round");
    }
    ScoreField field(grid_x, grid_y);
    const double log_v = std::log(static_cast<double>(ledger.rounds));
    for (std::size_t c = 0; c < field.size(); ++c) {
        const int n = ledger.visit_count[c];
        if (n == 0) {
            field.values[c] = std::numeric_limits<double>::infinity();
        } else {
            field.values[c] = ledger.cum_reward[c] / n + zeta_ucb * std::sqrt(2.0 * log_v / n);
        }
    }
    return field;
}

/// Replaces +inf sentinels by max finite + 10 * score range so forced
/// exploration survives the softmax without producing NaNs. An all-equal
/// finite field gets a unit bump instead of a degenerate zero range.
inline ScoreField replace_infinite_scores(const ScoreField& field) {
    double max_finite = -std::numeric_limits<double>::infinity();
    double min_finite = std::numeric_limits<double>::infinity();
    bool any_inf = false;
    for (double v : field.values) {
        if (std::isinf(v)) {
            any_inf = true;
        } else {
            max_finite = std::max(max_finite, v);
            min_finite = std::min(min_finite, v);
        }
    }
    if (!any_inf) {
        return field;
    }
    if (!std::isfinite(max_finite)) { // everything infinite
        max_finite = 0.0;
        min_finite = 0.0;
    }
    const double range = max_finite - min_finite;
    const double sentinel = max_finite + 10.0 * std::max(range, 1.0);
    ScoreField out = field;
    for (double& v : out.values) {
        if (std::isinf(v)) {
            v = sentinel;
        }
    }
    return out;
}

/// Top-n cells by score, descending; ties are broken uniformly at random
/// (then by index). Consumes one uniform draw per cell regardless of ties.
inline std::vector<int> top_n_cells(const ScoreField& scores, int n, std::mt19937_64& rng) {
    const int n_cells = static_cast<int>(scores.size());
    if (n < 1 || n > n_cells) {
        throw std::invalid_argument("top_n_cells: need 1 <= n <= #cells");
    }
    std::vector<double> tie(scores.size());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& t : tie) {
        t = unif(rng);
    }
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = scores.values[static_cast<std::size_t>(a)];
        const double sb = scores.values[static_cast<std::size_t>(b)];
        if (sa != sb) {
            return sa > sb;
        }
        const double ta = tie[static_cast<std::size_t>(a)];
        const double tb = tie[static_cast<std::size_t>(b)];
        if (ta != tb) {
            return ta < tb;
        }
        return a < b;
    });
    order.resize(static_cast<std::size_t>(n));
    return order;
}

/// Combined selection: s_hat = base + gamma * hp, softmax at temperature tau,
/// then sequential sampling without replacement. Infinite base scores are
/// replaced (forced exploration) before the softmax.
inline std::vector<int> combined_select(const ScoreField& base_scores, const ScoreField& hp_scores,
                                        double gamma, double tau, int n, std::mt19937_64& rng,
                                        ScoreField* probs_out = nullptr) {
    if (base_scores.size() != hp_scores.size()) {
        throw std::invalid_argument("combined_select: field size mismatch");
    }
    const ScoreField base = replace_infinite_scores(base_scores);
    ScoreField combined(base.X, base.Y);
    for (std::size_t i = 0; i < combined.size(); ++i) {
        combined.values[i] = base.values[i] + gamma * hp_scores.values[i];
    }
    const ScoreField probs = softmax_probs(combined, tau);
    if (probs_out != nullptr) {
        *probs_out = probs;
    }
    return sample_without_replacement(probs, n, rng);
}

/// One bandit strategy over the grid: the stationary baselines, the Hawkes
/// UCB variants, and their combinations. `recommend()` produces the ranked
/// cells for the upcoming round; `observe()` folds the round's observations
/// back in and advances the tracker clock.
class BanditPolicy {
public:
    BanditPolicy(PolicyKind kind, PolicyConfig cfg, int grid_x, int grid_y, PriorConfig priors,
                 MHConfig mh_cfg, StreamSeeder seeder)
        : kind_(kind), cfg_(cfg), X_(grid_x), Y_(grid_y), ledger_(grid_x * grid_y),
          seeder_(seeder) {
        cfg_.validate(grid_x * grid_y);
        if (policy_uses_gp(kind) && !(cfg.sigma_gp > 0.0)) {
            throw std::invalid_argument("BanditPolicy: GP-based kinds need sigma_gp > 0");
        }
        if (policy_uses_tracker(kind)) {
            // the tracker's realization count L is the posterior sample count
            tracker_ = std::make_unique<HawkesTracker>(grid_x, grid_y, mh_cfg.num_samples, priors,
                                                       mh_cfg, seeder.child(0x7261636bULL));
        }
        if (policy_uses_gp(kind)) {
            cell_obs_count_.assign(static_cast<std::size_t>(grid_x * grid_y), 0);
            cell_obs_sum_.assign(static_cast<std::size_t>(grid_x * grid_y), 0.0);
        }
    }

    [[nodiscard]] PolicyKind kind() const { return kind_; }
    [[nodiscard]] const RewardLedger& ledger() const { return ledger_; }
    [[nodiscard]] const HawkesTracker* tracker() const { return tracker_.get(); }
    [[nodiscard]] const ScoreField& last_probs() const { return last_probs_; }
    [[nodiscard]] const ScoreField& last_base_field() const { return last_base_; }
    [[nodiscard]] const ScoreField& last_hp_field() const { return last_hp_; }

    /// Ranked list of N distinct cells for the upcoming round. The very
    /// first round is uniform at random for every policy kind.
    std::vector<int> recommend() {
        auto rng = seeder_.stream(RngUse::select, static_cast<std::uint64_t>(ledger_.rounds));
        last_probs_ = ScoreField();
        last_base_ = ScoreField();
        last_hp_ = ScoreField();
        if (ledger_.rounds == 0) {
            ScoreField uniform(X_, Y_, 1.0 / static_cast<double>(X_ * Y_));
            last_probs_ = uniform;
            return sample_without_replacement(uniform, cfg_.N, rng);
        }
        switch (kind_) {
        case PolicyKind::eps_greedy: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const bool explore = cfg_.epsilon > 0.0 && unif(rng) < cfg_.epsilon;
            if (explore) {
                ScoreField uniform(X_, Y_, 1.0 / static_cast<double>(X_ * Y_));
                last_probs_ = uniform;
                return sample_without_replacement(uniform, cfg_.N, rng);
            }
            ScoreField means(X_, Y_);
            for (std::size_t c = 0; c < means.size(); ++c) {
                means.values[c] = ledger_.mean_reward(static_cast<int>(c));
            }
            last_base_ = means;
            return top_n_cells(means, cfg_.N, rng);
        }
        case PolicyKind::ucb1: {
            const ScoreField scores = ucb1_scores(ledger_, cfg_.zeta_ucb, X_, Y_);
            last_base_ = scores;
            return top_n_cells(scores, cfg_.N, rng);
        }
        case PolicyKind::spucb: {
            const ScoreField scores = gp_scores();
            last_base_ = scores;
            const ScoreField probs = softmax_probs(scores, cfg_.tau_gp);
            last_probs_ = probs;
            return sample_without_replacement(probs, cfg_.N, rng);
        }
        case PolicyKind::ucb1_hp:
        case PolicyKind::ucb1_hpsp:
        case PolicyKind::hpspucb: {
            const ScoreField base =
                kind_ == PolicyKind::hpspucb
                    ? gp_scores()
                    : ucb1_scores(ledger_, cfg_.zeta_ucb, X_, Y_);
            const double sigma = kind_ == PolicyKind::ucb1_hp ? 0.0 : cfg_.sigma_gp;
            const ScoreField hp = tracker_->smoothed_intensity_ucb(cfg_.zeta_hp, sigma);
            last_base_ = base;
            last_hp_ = hp;
            return combined_select(base, hp, cfg_.gamma, cfg_.tau, cfg_.N, rng, &last_probs_);
        }
        }
        throw std::logic_error("recommend: unhandled policy kind");
    }

    /// Folds the round's observations into the ledger (and GP data / tracker
    /// where applicable) and advances the clock to window.end.
    void observe(const std::vector<Observation>& observations, const TimeWindow& window) {
        window.validate();
        for (const Observation& obs : observations) {
            ledger_.record(obs.cell, obs.reward);
            if (policy_uses_gp(kind_)) {
                cell_obs_count_[static_cast<std::size_t>(obs.cell)] += 1;
                cell_obs_sum_[static_cast<std::size_t>(obs.cell)] += obs.reward;
            }
            if (tracker_) {
                tracker_->assimilate(obs.cell, ledger_.rounds, obs.times, window);
            }
        }
        if (tracker_) {
            tracker_->fill_gaps(ledger_.rounds, window.end);
        }
        ledger_.rounds += 1;
    }

    /// GP posterior UCB over all cells from the aggregated per-cell
    /// observation statistics (exact equivalent of the duplicated-row fit).
    [[nodiscard]] ScoreField gp_scores() const {
        std::vector<CellFeature> train;
        std::vector<double> targets;
        std::vector<double> noise;
        for (std::size_t c = 0; c < cell_obs_count_.size(); ++c) {
            if (cell_obs_count_[c] > 0) {
                train.push_back(feature_of(static_cast<int>(c)));
                targets.push_back(cell_obs_sum_[c] / cell_obs_count_[c]);
                noise.push_back(cfg_.gp_jitter / cell_obs_count_[c]);
            }
        }
        if (train.empty()) {
            throw std::logic_error("gp_scores: no observations collected yet");
        }
        std::vector<CellFeature> queries;
        queries.reserve(static_cast<std::size_t>(X_ * Y_));
        for (int c = 0; c < X_ * Y_; ++c) {
            queries.push_back(feature_of(c));
        }
        GPConfig gp_cfg{cfg_.sigma_gp, cfg_.gp_jitter};
        const GPPrediction pred = gp_fit_predict(train, targets, queries, gp_cfg, &noise);
        ScoreField field(X_, Y_);
        for (std::size_t c = 0; c < field.size(); ++c) {
            field.values[c] = pred.mean[c] + cfg_.zeta_gp * pred.stddev[c];
        }
        return field;
    }

private:
    [[nodiscard]] CellFeature feature_of(int cell) const { return CellFeature{cell % X_, cell / X_}; }

    PolicyKind kind_;
    PolicyConfig cfg_;
    int X_;
    int Y_;
    RewardLedger ledger_;
    StreamSeeder seeder_;
    std::unique_ptr<HawkesTracker> tracker_;
    std::vector<int> cell_obs_count_;
    std::vector<double> cell_obs_sum_;
    ScoreField last_probs_;
    ScoreField last_base_;
    ScoreField last_hp_;
};

} // namespace hpmab
