#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hpmab/bayes.hpp"
#include "hpmab/hawkes.hpp"
#include "hpmab/random.hpp"
#include "hpmab/spatial.hpp"

namespace hpmab {

/// Per-cell state: the best-guess history, L simulated gap realizations with
/// their posterior parameter samples, and the time both are synced to.
struct CellState {
    EventSeq best_guess;
    std::vector<HawkesParams> posterior;     // length L
    std::vector<EventSeq> realizations;      // length L, events in (last sync of best_guess, synced_to]
    std::vector<ExcitationState> excitation; // per realization, at synced_to
    double synced_to = 0.0;
    MhDiagnostics last_mh;                   // from the most recent posterior refresh
};

/// Per-cell Hawkes state machine: gap simulation between visits, most-likely
/// realization selection, best-guess merging, posterior refresh, and the
/// intensity UCB score across the grid.
class HawkesTracker {
public:
    HawkesTracker(int grid_x, int grid_y, int num_realizations, PriorConfig priors,
                  MHConfig mh_cfg, StreamSeeder seeder)
        : X_(grid_x), Y_(grid_y), L_(num_realizations), priors_(priors), mh_cfg_(mh_cfg),
          seeder_(seeder) {
        if (grid_x < 1 || grid_y < 1 || num_realizations < 1) {
            throw std::invalid_argument("HawkesTracker: need positive grid dims and L >= 1");
        }
        priors_.validate();
        mh_cfg_.validate();
        mh_cfg_.num_samples = L_;
        cells_.resize(static_cast<std::size_t>(grid_x) * static_cast<std::size_t>(grid_y));
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            auto rng = seeder_.stream(RngUse::prior_init, c);
            cells_[c].posterior = sample_prior(priors_, L_, rng);
            cells_[c].realizations.assign(static_cast<std::size_t>(L_), EventSeq{});
            cells_[c].excitation.assign(static_cast<std::size_t>(L_), ExcitationState{});
        }
    }

    [[nodiscard]] int num_cells() const { return X_ * Y_; }
    [[nodiscard]] int num_realizations() const { return L_; }
    [[nodiscard]] double current_time() const { return t_c_; }
    [[nodiscard]] const CellState& cell(int c) const {
        return cells_.at(static_cast<std::size_t>(c));
    }

    /// Direct state access for crafted instances; call rebuild_excitation
    /// afterwards so the cached intensity state matches the injected history.
    [[nodiscard]] CellState& mutable_cell(int c) { return cells_.at(static_cast<std::size_t>(c)); }

    void rebuild_excitation(int cell_id) {
        CellState& cs = cells_.at(static_cast<std::size_t>(cell_id));
        cs.excitation.resize(cs.realizations.size());
        for (std::size_t l = 0; l < cs.realizations.size(); ++l) {
            const EventSeq merged = merge_sequences(cs.best_guess, cs.realizations[l]);
            cs.excitation[l] = ExcitationState::from_history(cs.posterior[l], merged, cs.synced_to);
        }
    }

    /// Index of the realization whose merged context makes the observation
    /// most likely (ties broken by lowest index).
    [[nodiscard]] int select_realization(int cell_id, const EventSeq& observed,
                                         const TimeWindow& window) const {
        const CellState& cs = cells_.at(static_cast<std::size_t>(cell_id));
        int best = 0;
        double best_ll = kNegInf;
        for (int l = 0; l < L_; ++l) {
            const EventSeq context = merge_sequences(cs.best_guess,
                                                     cs.realizations[static_cast<std::size_t>(l)]);
            const double ll =
                log_likelihood(cs.posterior[static_cast<std::size_t>(l)], observed, window, context);
            if (ll > best_ll) {
                best_ll = ll;
                best = l;
            }
        }
        return best;
    }

    /// Folds one visit's observation into the cell: picks the most likely
    /// realization, merges it with the observation into the best guess,
    /// refreshes the posterior on [0, window.end], and restarts the gap
    /// realizations (empty) at window.end.
    void assimilate(int cell_id, int visit, const EventSeq& observed, const TimeWindow& window) {
        window.validate();
        detail::require_sorted(observed, "assimilate observed");
        if (!observed.empty() &&
            (observed.front() < window.start || observed.back() >= window.end)) {
            throw std::invalid_argument("assimilate: observed events outside [start, end)");
        }
        CellState& cs = cells_.at(static_cast<std::size_t>(cell_id));
        if (window.start < cs.synced_to) {
            throw std::invalid_argument("assimilate: window starts before cell sync point");
        }

        const int chosen = select_realization(cell_id, observed, window);
        cs.best_guess = merge_sequences(
            merge_sequences(cs.best_guess, cs.realizations[static_cast<std::size_t>(chosen)]),
            observed);

        auto rng = seeder_.stream(RngUse::mh_chain, static_cast<std::uint64_t>(cell_id),
                                  static_cast<std::uint64_t>(visit));
        auto refreshed = mh_sample(cs.best_guess, TimeWindow{0.0, window.end}, priors_, mh_cfg_, rng);
        cs.posterior = std::move(refreshed.samples);
        cs.last_mh = refreshed.diagnostics;

        cs.synced_to = window.end;
        for (int l = 0; l < L_; ++l) {
            cs.realizations[static_cast<std::size_t>(l)].clear();
            cs.excitation[static_cast<std::size_t>(l)] = ExcitationState::from_history(
                cs.posterior[static_cast<std::size_t>(l)], cs.best_guess, cs.synced_to);
        }
    }

    /// Extends every realization of every cell from its sync point to
    /// `up_to` by thinning, conditional on best_guess plus the realization
    /// so far. No-op for cells already synced.
    void fill_gaps(int visit, double up_to) {
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            CellState& cs = cells_[c];
            if (up_to < cs.synced_to) {
                throw std::invalid_argument("fill_gaps: up_to precedes a cell sync point");
            }
            if (up_to == cs.synced_to) {
                continue;
            }
            auto rng = seeder_.stream(RngUse::gap_fill, c, static_cast<std::uint64_t>(visit));
            const TimeWindow gap{cs.synced_to, up_to};
            for (int l = 0; l < L_; ++l) {
                EventSeq extension = simulate_thinning_resume(
                    cs.posterior[static_cast<std::size_t>(l)],
                    cs.excitation[static_cast<std::size_t>(l)], gap, rng);
                auto& real = cs.realizations[static_cast<std::size_t>(l)];
                real.insert(real.end(), extension.begin(), extension.end());
            }
            cs.synced_to = up_to;
        }
        t_c_ = up_to;
    }

    /// UCB on intensities at the current time: mean over the L posterior
    /// intensities plus zeta_hp population standard deviations.
    [[nodiscard]] ScoreField intensity_ucb(double zeta_hp) const {
        if (!(zeta_hp >= 0.0)) {
            throw std::invalid_argument("intensity_ucb: zeta_hp must be >= 0");
        }
        ScoreField field(X_, Y_);
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            const CellState& cs = cells_[c];
            double mean = 0.0;
            double sq = 0.0;
            for (int l = 0; l < L_; ++l) {
                // realizations are synced to t_c, so the cached excitation
                // state gives lambda_l(t_c) directly
                const double lambda = cs.posterior[static_cast<std::size_t>(l)].mu +
                                      cs.excitation[static_cast<std::size_t>(l)].value;
                mean += lambda;
                sq += lambda * lambda;
            }
            mean /= static_cast<double>(L_);
            sq /= static_cast<double>(L_);
            const double var = std::max(sq - mean * mean, 0.0);
            field.values[c] = mean + zeta_hp * std::sqrt(var);
        }
        return field;
    }

    /// Gaussian-smoothed intensity UCB; sigma = 0 returns the raw field.
    [[nodiscard]] ScoreField smoothed_intensity_ucb(double zeta_hp, double sigma_gp) const {
        return gaussian_filter(intensity_ucb(zeta_hp), sigma_gp);
    }

    /// Recomputes lambda_l(t) from scratch (test/debug path; the scoring path
    /// uses the cached excitation states).
    [[nodiscard]] double intensity_of(int cell_id, int l, double t) const {
        const CellState& cs = cells_.at(static_cast<std::size_t>(cell_id));
        const EventSeq merged =
            merge_sequences(cs.best_guess, cs.realizations[static_cast<std::size_t>(l)]);
        return intensity(cs.posterior[static_cast<std::size_t>(l)], merged, t);
    }

    /// Line-delimited state dump, one JSON-like record per cell.
    void dump_state(std::ostream& os) const {
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            const CellState& cs = cells_[c];
            os << "{\"cell\":" << c << ",\"synced_to\":" << cs.synced_to
               << ",\"best_guess_len\":" << cs.best_guess.size()
               << ",\"mh_acceptance\":" << cs.last_mh.acceptance_rate
               << ",\"mh_chain_length\":" << cs.last_mh.chain_length << ",\"posterior\":[";
            for (int l = 0; l < L_; ++l) {
                const HawkesParams& p = cs.posterior[static_cast<std::size_t>(l)];
                if (l > 0) {
                    os << ',';
                }
                os << "[" << p.mu << ',' << p.alpha << ',' << p.beta << "]";
            }
            os << "]}\n";
        }
    }

    /// Sorted duplicate-free union of two sorted sequences.
    [[nodiscard]] static EventSeq merge_sequences(const EventSeq& a, const EventSeq& b) {
        EventSeq out;
        out.reserve(a.size() + b.size());
        std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    int X_;
    int Y_;
    int L_;
    PriorConfig priors_;
    MHConfig mh_cfg_;
    StreamSeeder seeder_;
    double t_c_ = 0.0;
    std::vector<CellState> cells_;
};

} // namespace hpmab
