#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpmab {

/// Event timestamps in seconds, sorted non-decreasing.
using EventSeq = std::vector<double>;

struct TimeWindow {
    double start = 0.0;
    double end = 0.0;

    [[nodiscard]] double length() const { return end - start; }

    void validate() const {
        if (!std::isfinite(start) || !std::isfinite(end) || end < start) {
            throw std::invalid_argument("TimeWindow: need finite start <= end");
        }
    }
};

/// Parameters of one exponential-kernel self-exciting process:
/// lambda(t) = mu + sum_{t_i < t} alpha * beta * exp(-beta * (t - t_i)).
struct HawkesParams {
    double mu = 0.0;    // background rate, events per second, > 0
    double alpha = 0.0; // infectivity (mean offspring per event), in (0, 1)
    double beta = 0.0;  // decay rate per second, > 0

    [[nodiscard]] bool in_support() const {
        return std::isfinite(mu) && mu > 0.0 && std::isfinite(beta) && beta > 0.0 &&
               std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0;
    }

    void validate() const {
        if (!in_support()) {
            throw std::invalid_argument("HawkesParams: need mu > 0, beta > 0, 0 < alpha < 1");
        }
    }
};

namespace detail {

// Kernel terms smaller than this are dropped.
constexpr double kKernelFloor = 1e-300;

inline void require_sorted(const EventSeq& seq, const char* what) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (!std::isfinite(seq[i])) {
            throw std::invalid_argument(std::string(what) + ": non-finite timestamp");
        }
        if (i > 0 && seq[i] < seq[i - 1]) {
            throw std::invalid_argument(std::string(what) + ": timestamps not sorted");
        }
    }
}

// sum_{t_i <= t} alpha * beta * exp(-beta * (t - t_i)); walks backwards and
// stops once terms fall below the floor.
inline double excitation_at(const HawkesParams& p, const EventSeq& history, double t,
                            bool include_equal) {
    double acc = 0.0;
    const double scale = p.alpha * p.beta;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        const double dt = t - *it;
        if (dt < 0.0 || (dt == 0.0 && !include_equal)) {
            continue;
        }
        const double term = scale * std::exp(-p.beta * dt);
        if (term < kKernelFloor) {
            break; // older events only decay further
        }
        acc += term;
    }
    return acc;
}

} // namespace detail

/// Conditional intensity lambda(t | params, history); only events strictly
/// before t contribute.
inline double intensity(const HawkesParams& params, const EventSeq& history, double t) {
    params.validate();
    if (!std::isfinite(t)) {
        throw std::invalid_argument("intensity: non-finite evaluation time");
    }
    detail::require_sorted(history, "intensity history");
    return params.mu + detail::excitation_at(params, history, t, /*include_equal=*/false);
}

/// Log-likelihood of `events` on `window`, conditional on `context` (events
/// strictly before window.start that contribute excitation only).
///
/// Returns  sum_i log lambda(t_i)  -  integral_window lambda(u) du,
/// with the compensator in closed form:
///   mu * |window| + sum_j alpha * (exp(-beta * max(0, s - t_j)) - exp(-beta * (e - t_j)))
/// over context and in-window events.
inline double log_likelihood(const HawkesParams& params, const EventSeq& events,
                             const TimeWindow& window, const EventSeq& context = {}) {
    params.validate();
    window.validate();
    detail::require_sorted(events, "log_likelihood events");
    detail::require_sorted(context, "log_likelihood context");
    for (double t : events) {
        if (t < window.start || t > window.end) {
            throw std::invalid_argument("log_likelihood: event outside window");
        }
    }
    if (!context.empty() && context.back() >= window.start) {
        throw std::invalid_argument("log_likelihood: context must precede window start");
    }

    const double s = window.start;
    const double e = window.end;

    // Point terms via the O(n) decay recursion. excite = sum over strictly
    // earlier events of exp(-beta * (t_i - t_j)), seeded from the context.
    // `pending` counts events at exactly prev_t not yet folded in, so
    // simultaneous events do not excite each other.
    double log_points = 0.0;
    double excite = 0.0;
    double prev_t = s;
    double pending = 0.0;
    if (!events.empty()) {
        for (auto it = context.rbegin(); it != context.rend(); ++it) {
            const double term = std::exp(-params.beta * (events.front() - *it));
            if (params.alpha * params.beta * term < detail::kKernelFloor) {
                break;
            }
            excite += term;
        }
        prev_t = events.front();
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        const double dt = events[i] - prev_t;
        if (dt > 0.0) {
            excite = std::exp(-params.beta * dt) * (excite + pending);
            pending = 0.0;
            prev_t = events[i];
        }
        log_points += std::log(params.mu + params.alpha * params.beta * excite);
        pending += 1.0;
    }

    double compensator = params.mu * window.length();
    auto tail_mass = [&](double t_j) {
        // integral over [max(s, t_j), e] of the kernel started at t_j
        return params.alpha *
               (std::exp(-params.beta * std::max(0.0, s - t_j)) - std::exp(-params.beta * (e - t_j)));
    };
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
        const double mass = tail_mass(*it);
        if (mass < detail::kKernelFloor) {
            break;
        }
        compensator += mass;
    }
    for (double t_j : events) {
        compensator += tail_mass(t_j);
    }
    return log_points - compensator;
}

/// Running excitation state for resumable thinning: the value
/// sum_{t_i <= t} alpha * beta * exp(-beta * (t - t_i)) at a known time t.
struct ExcitationState {
    double value = 0.0;

    static ExcitationState from_history(const HawkesParams& p, const EventSeq& history,
                                        double at_time) {
        return ExcitationState{detail::excitation_at(p, history, at_time, /*include_equal=*/true)};
    }
};

/// Ogata's modified thinning on [window.start, window.end), resuming from a
/// precomputed excitation state at window.start. The dominating rate is
/// re-evaluated after every accepted or rejected candidate (the exponential
/// kernel decays between events, so the left endpoint dominates).
/// On return `state` holds the excitation at window.end including new events.
inline EventSeq simulate_thinning_resume(const HawkesParams& params, ExcitationState& state,
                                         const TimeWindow& window, std::mt19937_64& rng,
                                         std::size_t max_events = 1u << 24) {
    params.validate();
    window.validate();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    EventSeq out;
    double t = window.start;
    while (true) {
        const double lambda_ub = params.mu + state.value;
        const double wait = -std::log1p(-unif(rng)) / lambda_ub;
        const double cand = t + wait;
        if (!(cand < window.end)) {
            state.value *= std::exp(-params.beta * (window.end - t));
            return out;
        }
        state.value *= std::exp(-params.beta * (cand - t));
        const double lambda_cand = params.mu + state.value;
        if (unif(rng) * lambda_ub <= lambda_cand) {
            out.push_back(cand);
            state.value += params.alpha * params.beta;
            if (out.size() > max_events) {
                throw std::runtime_error("simulate_thinning: event cap exceeded");
            }
        }
        t = cand;
    }
}

/// Simulates the process on [window.start, window.end) conditional on
/// `context` (all strictly before window.start). Sorted output; reproducible
/// given the rng state.
inline EventSeq simulate_thinning(const HawkesParams& params, const EventSeq& context,
                                  const TimeWindow& window, std::mt19937_64& rng) {
    detail::require_sorted(context, "simulate_thinning context");
    if (!context.empty() && context.back() >= window.start) {
        throw std::invalid_argument("simulate_thinning: context must precede window start");
    }
    auto state = ExcitationState::from_history(params, context, window.start);
    return simulate_thinning_resume(params, state, window, rng);
}

struct Rect {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;

    [[nodiscard]] bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }

    void validate() const {
        if (!(x_max > x_min) || !(y_max > y_min)) {
            throw std::invalid_argument("Rect: need max > min on both axes");
        }
    }
};

/// Branching (immigrant/offspring) generator configuration.
struct SynthConfig {
    double eta = 0.0;     // immigrant rate per second
    double phi = 0.0;     // mean offspring count per event
    double omega = 1.0;   // exponential waiting-time rate (mean wait 1/omega)
    double sigma = 0.0;   // offspring displacement std dev per axis
    double horizon = 1.0; // total seconds T
    Rect domain{};        // spatial domain, defaults to the unit square

    void validate() const {
        if (!(eta >= 0.0) || !(phi >= 0.0) || !(omega > 0.0) || !(sigma >= 0.0) ||
            !(horizon > 0.0)) {
            throw std::invalid_argument(
                "SynthConfig: need eta >= 0, phi >= 0, omega > 0, sigma >= 0, horizon > 0");
        }
        domain.validate();
    }
};

struct SpatioTemporalEvents {
    struct Event {
        double t = 0.0;
        double x = 0.0;
        double y = 0.0;
    };
    std::vector<Event> events;   // sorted by t
    std::vector<int> parent;     // index into events; -1 for immigrants

    [[nodiscard]] std::size_t size() const { return events.size(); }

    /// Root immigrant index per event (cluster label).
    [[nodiscard]] std::vector<int> cluster_roots() const {
        std::vector<int> root(events.size());
        for (std::size_t i = 0; i < events.size(); ++i) {
            int r = static_cast<int>(i);
            while (parent[static_cast<std::size_t>(r)] >= 0) {
                r = parent[static_cast<std::size_t>(r)];
            }
            root[i] = r;
        }
        return root;
    }
};

/// Spatio-temporal branching generator: Poisson(eta*T) immigrants uniform in
/// space and time, then per event a Poisson(phi) offspring count, Exp(omega)
/// waiting times and N(0, sigma^2) displacement per axis. Candidates outside
/// the time or space domain are discarded and spawn nothing.
inline SpatioTemporalEvents generate_synthetic(const SynthConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    struct Node {
        double t, x, y;
        int parent;
    };
    std::vector<Node> accepted;

    std::poisson_distribution<long> immigrant_count(cfg.eta * cfg.horizon);
    std::uniform_real_distribution<double> u_t(0.0, cfg.horizon);
    std::uniform_real_distribution<double> u_x(cfg.domain.x_min, cfg.domain.x_max);
    std::uniform_real_distribution<double> u_y(cfg.domain.y_min, cfg.domain.y_max);
    const long n_imm = cfg.eta > 0.0 ? immigrant_count(rng) : 0;
    accepted.reserve(static_cast<std::size_t>(n_imm));
    for (long i = 0; i < n_imm; ++i) {
        accepted.push_back(Node{u_t(rng), u_x(rng), u_y(rng), -1});
    }

    std::poisson_distribution<int> offspring_count(cfg.phi);
    std::exponential_distribution<double> wait(cfg.omega);
    std::normal_distribution<double> jump(0.0, cfg.sigma);
    for (std::size_t i = 0; i < accepted.size(); ++i) {
        const Node parent = accepted[i];
        const int kids = cfg.phi > 0.0 ? offspring_count(rng) : 0;
        for (int k = 0; k < kids; ++k) {
            const double t = parent.t + wait(rng);
            const double x = parent.x + (cfg.sigma > 0.0 ? jump(rng) : 0.0);
            const double y = parent.y + (cfg.sigma > 0.0 ? jump(rng) : 0.0);
            if (t <= cfg.horizon && cfg.domain.contains(x, y)) {
                accepted.push_back(Node{t, x, y, static_cast<int>(i)});
            }
        }
    }

    std::vector<std::size_t> order(accepted.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return accepted[a].t < accepted[b].t; });
    std::vector<int> new_index(accepted.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        new_index[order[pos]] = static_cast<int>(pos);
    }

    SpatioTemporalEvents out;
    out.events.reserve(accepted.size());
    out.parent.reserve(accepted.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const Node& n = accepted[order[pos]];
        out.events.push_back({n.t, n.x, n.y});
        out.parent.push_back(n.parent < 0 ? -1 : new_index[static_cast<std::size_t>(n.parent)]);
    }
    return out;
}

} // namespace hpmab
