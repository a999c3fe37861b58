#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hpmab {

/// One visit's ranked recommendation against ground truth. `ranked_gains[i]`
/// is the true event count of the cell recommended at rank i; `true_gains`
/// covers every grid cell. A cell is relevant iff its true gain is > 0, so a
/// recommended cell with positive gain is necessarily relevant.
struct RankedResult {
    std::vector<double> ranked_gains;
    std::vector<double> true_gains;

    RankedResult() = default;
    RankedResult(const std::vector<int>& ranked_cells, const std::vector<double>& gains_per_cell)
        : true_gains(gains_per_cell) {
        ranked_gains.reserve(ranked_cells.size());
        for (int cell : ranked_cells) {
            if (cell < 0 || static_cast<std::size_t>(cell) >= gains_per_cell.size()) {
                throw std::invalid_argument("RankedResult: cell id out of range");
            }
            ranked_gains.push_back(gains_per_cell[static_cast<std::size_t>(cell)]);
        }
    }

    [[nodiscard]] std::size_t n() const { return ranked_gains.size(); }
    [[nodiscard]] bool hit(std::size_t i) const { return ranked_gains[i] > 0.0; }
    [[nodiscard]] std::size_t relevant_count() const {
        std::size_t g = 0;
        for (double v : true_gains) {
            if (v > 0.0) {
                ++g;
            }
        }
        return g;
    }
};

/// Total reward normalized by total event count; 0 when there were no events.
inline double reward_bar(double total_reward, double total_events) {
    if (total_events < 0.0) {
        throw std::invalid_argument("reward_bar: total_events must be >= 0");
    }
    return total_events == 0.0 ? 0.0 : total_reward / total_events;
}

/// NDCG at N with linear gain and log2(i+1) discount; ideal ranking takes the
/// N largest true gains over all cells. An empty window (IDCG = 0) scores 1.
inline double ndcg_at_n(const RankedResult& r) {
    if (r.n() < 1) {
        throw std::invalid_argument("ndcg_at_n: need at least one ranked cell");
    }
    double dcg = 0.0;
    for (std::size_t i = 0; i < r.n(); ++i) {
        dcg += r.ranked_gains[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    std::vector<double> best(r.true_gains);
    std::sort(best.begin(), best.end(), std::greater<double>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < r.n() && i < best.size(); ++i) {
        idcg += best[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    return idcg == 0.0 ? 1.0 : dcg / idcg;
}

/// Modified reciprocal hit rank: r_1 = 1, consecutive hits share a rank,
/// misses advance it; 0 when there are no relevant cells.
inline double mrhr(const RankedResult& r) {
    const double g = static_cast<double>(r.relevant_count());
    if (g == 0.0) {
        return 0.0;
    }
    double rank = 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < r.n(); ++i) {
        if (i > 0 && !r.hit(i - 1)) {
            rank += 1.0;
        }
        if (r.hit(i)) {
            total += 1.0 / rank;
        }
    }
    return total / g;
}

struct Prf {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

inline Prf prf(const RankedResult& r) {
    double hits = 0.0;
    for (std::size_t i = 0; i < r.n(); ++i) {
        if (r.hit(i)) {
            hits += 1.0;
        }
    }
    const double g = static_cast<double>(r.relevant_count());
    Prf out;
    out.recall = g == 0.0 ? 0.0 : hits / g;
    out.precision = r.n() == 0 ? 0.0 : hits / static_cast<double>(r.n());
    out.f1 = (out.recall + out.precision) == 0.0
                 ? 0.0
                 : 2.0 * out.recall * out.precision / (out.recall + out.precision);
    return out;
}

/// Precision divided by the best achievable precision min(|g|, N)/N.
inline double norm_precision(const RankedResult& r) {
    const double g = static_cast<double>(r.relevant_count());
    if (g == 0.0) {
        return 0.0;
    }
    double hits = 0.0;
    for (std::size_t i = 0; i < r.n(); ++i) {
        if (r.hit(i)) {
            hits += 1.0;
        }
    }
    const double max_hits = std::min(g, static_cast<double>(r.n()));
    return hits / max_hits;
}

/// (1/|g|) * sum_{k=1..N} normalized-precision@k, clamped to 1 (the raw sum
/// exceeds 1 when N > |g| and all relevant cells rank first).
inline double avg_norm_precision(const RankedResult& r) {
    const double g = static_cast<double>(r.relevant_count());
    if (g == 0.0) {
        return 0.0;
    }
    double hits = 0.0;
    double total = 0.0;
    for (std::size_t k = 1; k <= r.n(); ++k) {
        if (r.hit(k - 1)) {
            hits += 1.0;
        }
        const double max_hits = std::min(g, static_cast<double>(k));
        total += hits / max_hits;
    }
    return std::min(total / g, 1.0);
}

} // namespace hpmab
