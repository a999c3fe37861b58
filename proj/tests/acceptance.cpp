// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. The three protocol-level ordering claims share one set of runs.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hpmab/hpmab.hpp"
#include "support/oracles.hpp"

using namespace hpmab;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report_line(int criterion, bool pass, const std::string& detail) {
    std::printf("[ACCEPTANCE] criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) { return format_double(v); }

double naive_intensity(const HawkesParams& p, const EventSeq& history, double t) {
    double lambda = p.mu;
    for (double ti : history) {
        if (ti < t) {
            lambda += p.alpha * p.beta * std::exp(-p.beta * (t - ti));
        }
    }
    return lambda;
}

} // namespace

// ---------------------------------------------------------------------------

TEST_CASE("likelihood closed form vs quadrature", "[c1]") {
    Stopwatch watch;
    std::mt19937_64 rng(20250809);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int instance = 0; instance < 100; ++instance) {
        const HawkesParams p{0.1 + 3.0 * u(rng), 0.02 + 0.95 * u(rng), 0.2 + 4.0 * u(rng)};
        const TimeWindow w{0.5 * u(rng), 2.0 + 6.0 * u(rng)};
        EventSeq events;
        const int n = 1 + static_cast<int>(u(rng) * 12);
        for (int i = 0; i < n; ++i) {
            events.push_back(w.start + u(rng) * w.length() * 0.999);
        }
        std::sort(events.begin(), events.end());
        EventSeq context;
        const int m = static_cast<int>(u(rng) * 6);
        for (int i = 0; i < m; ++i) {
            context.push_back(u(rng) * w.start * 0.99);
        }
        std::sort(context.begin(), context.end());

        // closed-form compensator, recovered exactly from the library values
        double log_points = 0.0;
        EventSeq merged(context);
        merged.insert(merged.end(), events.begin(), events.end());
        for (double t : events) {
            log_points += std::log(naive_intensity(p, merged, t));
        }
        const double closed_compensator = log_points - log_likelihood(p, events, w, context);

        auto lambda = [&](double x) { return naive_intensity(p, merged, x); };
        std::vector<double> cuts{w.start};
        for (double t : events) {
            cuts.push_back(t);
        }
        cuts.push_back(w.end);
        double quad = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            quad += oracles::integrate(lambda, cuts[i], cuts[i + 1], 1e-12);
        }
        worst = std::max(worst, std::abs(closed_compensator - quad) / std::abs(quad));
    }
    const double elapsed = watch.seconds();
    const bool pass = worst <= 1e-6 && elapsed < 10.0;
    report_line(1, pass,
                "100 instances, worst compensator relative error " + fmt(worst) + ", " +
                    fmt(elapsed) + " s");
    CHECK(worst <= 1e-6);
    CHECK(elapsed < 10.0);
}

// ---------------------------------------------------------------------------

TEST_CASE("simulator calibration by KS and time rescaling", "[c2]") {
    Stopwatch watch;

    // alpha -> 0: inter-arrival times are Exponential(mu)
    const double mu = 2.0;
    const HawkesParams poisson_like{mu, 1e-12, 1.0};
    std::mt19937_64 rng(91);
    std::vector<double> gaps;
    double prev = 0.0;
    const EventSeq poisson_events = simulate_thinning(poisson_like, {}, {0.0, 5200.0}, rng);
    for (double t : poisson_events) {
        gaps.push_back(t - prev);
        prev = t;
    }
    REQUIRE(gaps.size() >= 10000);
    gaps.resize(10000);
    const auto ks_exp =
        oracles::ks_test(gaps, [&](double x) { return 1.0 - std::exp(-mu * x); });

    // alpha = 0.5: compensator-rescaled arrivals are unit-rate Poisson
    const HawkesParams p{1.0, 0.5, 2.0};
    std::mt19937_64 rng2(92);
    const EventSeq events = simulate_thinning(p, {}, {0.0, 6000.0}, rng2);
    REQUIRE(events.size() >= 10000);
    std::vector<double> rescaled;
    double decay_sum = 0.0;
    double prev_t = 0.0;
    double count_before = 0.0;
    for (double t : events) {
        decay_sum *= std::exp(-p.beta * (t - prev_t));
        rescaled.push_back(p.mu * t + p.alpha * (count_before - decay_sum));
        decay_sum += 1.0;
        count_before += 1.0;
        prev_t = t;
    }
    std::vector<double> xi;
    for (std::size_t i = 0; i + 1 < rescaled.size(); ++i) {
        xi.push_back(rescaled[i + 1] - rescaled[i]);
    }
    const auto ks_resc = oracles::ks_test(xi, [](double x) { return 1.0 - std::exp(-x); });

    const double elapsed = watch.seconds();
    const bool pass = ks_exp.p_value > 0.01 && ks_resc.p_value > 0.01 && elapsed < 30.0;
    report_line(2, pass,
                "KS p-values: exponential " + fmt(ks_exp.p_value) + ", time-rescaling " +
                    fmt(ks_resc.p_value) + ", " + fmt(elapsed) + " s");
    CHECK(ks_exp.p_value > 0.01);
    CHECK(ks_resc.p_value > 0.01);
    CHECK(elapsed < 30.0);
}

// ---------------------------------------------------------------------------

TEST_CASE("posterior recovery on simulated data", "[c3]") {
    Stopwatch watch;
    const HawkesParams truth{1.0, 0.5, 2.0};
    const TimeWindow horizon{0.0, 2000.0};
    PriorConfig priors; // Gamma(1,1), Beta(2,2)
    MHConfig cfg;       // burn 500, thin 5, L = 50, adapted scales

    double err_mu = 0.0;
    double err_alpha = 0.0;
    double err_beta = 0.0;
    const int n_seeds = 5;
    for (int seed = 0; seed < n_seeds; ++seed) {
        std::mt19937_64 sim_rng(7000 + static_cast<unsigned>(seed));
        const EventSeq data = simulate_thinning(truth, {}, horizon, sim_rng);
        std::mt19937_64 mh_rng(9000 + static_cast<unsigned>(seed));
        const auto posterior = mh_sample(data, horizon, priors, cfg, mh_rng);
        double mu = 0.0;
        double alpha = 0.0;
        double beta = 0.0;
        for (const auto& s : posterior.samples) {
            mu += s.mu;
            alpha += s.alpha;
            beta += s.beta;
        }
        const double L = static_cast<double>(posterior.samples.size());
        mu /= L;
        alpha /= L;
        beta /= L;
        err_mu += std::abs(mu - truth.mu) / truth.mu / n_seeds;
        err_alpha += std::abs(alpha - truth.alpha) / truth.alpha / n_seeds;
        err_beta += std::abs(beta - truth.beta) / truth.beta / n_seeds;
    }
    const double elapsed = watch.seconds();
    const bool pass = err_mu <= 0.25 && err_alpha <= 0.25 && err_beta <= 0.25 && elapsed < 120.0;
    report_line(3, pass,
                "mean relative errors mu " + fmt(err_mu) + ", alpha " + fmt(err_alpha) +
                    ", beta " + fmt(err_beta) + ", " + fmt(elapsed) + " s");
    CHECK(err_mu <= 0.25);
    CHECK(err_alpha <= 0.25);
    CHECK(err_beta <= 0.25);
    CHECK(elapsed < 120.0);
}

// ---------------------------------------------------------------------------

TEST_CASE("exhaustive metric oracle", "[c4]") {
    bool all_equal = true;
    std::vector<double> gains(4, 0.0);
    for (int code = 0; code < 81 && all_equal; ++code) {
        int c = code;
        for (int i = 0; i < 4; ++i) {
            gains[static_cast<std::size_t>(i)] = static_cast<double>(c % 3);
            c /= 3;
        }
        std::vector<int> cells{0, 1, 2, 3};
        do {
            for (int len = 1; len <= 4; ++len) {
                const std::vector<int> ranked(cells.begin(), cells.begin() + len);
                const RankedResult r(ranked, gains);
                const auto want = oracles::brute_metrics(ranked, gains);
                const auto p = prf(r);
                if (ndcg_at_n(r) != want.ndcg || mrhr(r) != want.mrhr ||
                    p.recall != want.recall || p.precision != want.precision ||
                    p.f1 != want.f1 || norm_precision(r) != want.norm_prc ||
                    avg_norm_precision(r) != want.avg_norm_prc) {
                    all_equal = false;
                }
            }
        } while (std::next_permutation(cells.begin(), cells.end()) && all_equal);
    }

    // pinned hand-computed values
    const RankedResult swapped({0, 1}, {2.0, 3.0, 0.0, 0.0});
    const double ndcg_err =
        std::abs(ndcg_at_n(swapped) - (2.0 + 3.0 / std::log2(3.0)) / (3.0 + 2.0 / std::log2(3.0)));
    const double mrhr_a = mrhr(RankedResult({2, 0, 1}, {1.0, 1.0, 0.0})); // hits (0,1,1)
    const double mrhr_b = mrhr(RankedResult({0, 2, 1}, {1.0, 1.0, 0.0})); // hits (1,0,1)
    const bool hand_ok = ndcg_err <= 1e-9 && std::abs(mrhr_a - 0.5) <= 1e-9 &&
                         std::abs(mrhr_b - 0.75) <= 1e-9 &&
                         std::abs(ndcg_at_n(swapped) - 0.91340) <= 1e-5;

    const bool pass = all_equal && hand_ok;
    report_line(4, pass,
                std::string("brute-force equivalence ") + (all_equal ? "exact" : "BROKEN") +
                    "; hand values NDCG " + fmt(ndcg_at_n(swapped)) + ", mRHR " + fmt(mrhr_a) +
                    "/" + fmt(mrhr_b));
    CHECK(all_equal);
    CHECK(hand_ok);
}

// ---------------------------------------------------------------------------
// Criteria 5-7 share the synthetic protocol runs below.

namespace {

// Per-policy hyperparameters from the documented grid search (each model is
// tuned separately and compared at its best, as the protocol prescribes).
json protocol_json(const std::string& kind) {
    json policy = {{"kind", kind},   {"epsilon", 0.1},  {"zeta_ucb", 1.0},
                   {"zeta_gp", 1.0}, {"tau_gp", 1.0},   {"sigma_gp", 1.0},
                   {"gamma", 18000.0}, {"tau", 1.0},    {"zeta_hp", 1.0}};
    if (kind == "spucb") {
        policy["sigma_gp"] = 0.5;
        policy["tau_gp"] = 2.0;
    } else if (kind == "hpspucb") {
        policy["sigma_gp"] = 0.5;
        policy["gamma"] = 60000.0;
    }
    return json{
        {"data",
         {{"synthetic",
           {{"eta", 8e-5}, {"phi", 0.99}, {"omega", 1e-4}, {"sigma", 1e-2}, {"horizon", 3.6e6}}}}},
        {"grid",
         {{"lon_min", 0.0}, {"lon_max", 1.0}, {"lat_min", 0.0}, {"lat_max", 1.0}, {"X", 10}, {"Y", 10}}},
        {"N", 5},
        {"W", 18000.0},
        {"L", 50},
        {"policy", policy},
        {"priors", {{"k_p", 1.0}, {"k_c", 1e-4}, {"m", 2.0}, {"n", 2.0}}},
        {"mh", {{"burn_in", 500}, {"thin", 5}, {"proposal_scale", 0.5}}},
        {"repetitions", 10},
        {"seed", 1717}};
}

const RunResult& protocol_run(const std::string& kind) {
    static std::map<std::string, RunResult> cache;
    auto it = cache.find(kind);
    if (it == cache.end()) {
        std::vector<std::string> errors;
        const auto cfg = parse_experiment_config(protocol_json(kind), errors);
        if (!cfg) {
            throw std::runtime_error("protocol config invalid");
        }
        Stopwatch watch;
        it = cache.emplace(kind, run_experiment(*cfg, 1)).first;
        std::printf("[protocol] %s done in %.1f s (reward_bar %.4f)\n", kind.c_str(),
                    watch.seconds(), it->second.aggregates.reward_bar);
        std::fflush(stdout);
    }
    return it->second;
}

std::vector<std::vector<double>> curves_by_rep(const RunResult& r) {
    std::vector<std::vector<double>> curves(
        static_cast<std::size_t>(r.repetitions),
        std::vector<double>(static_cast<std::size_t>(r.visits), 0.0));
    for (const auto& row : r.rows) {
        curves[static_cast<std::size_t>(row.rep)][static_cast<std::size_t>(row.visit)] =
            row.cum_reward_bar;
    }
    return curves;
}

struct CurveComparison {
    bool early_within_noise = true;
    bool late_strictly_above = true;
};

CurveComparison compare_curves(const RunResult& variant, const RunResult& predecessor) {
    const auto a = curves_by_rep(variant);
    const auto b = curves_by_rep(predecessor);
    const int V = variant.visits;
    const int R = variant.repetitions;
    CurveComparison out;
    const int early_end = V / 10;
    const int late_start = V - V / 4;
    for (int v = 0; v < V; ++v) {
        std::vector<double> diffs;
        for (int rep = 0; rep < R; ++rep) {
            diffs.push_back(a[static_cast<std::size_t>(rep)][static_cast<std::size_t>(v)] -
                            b[static_cast<std::size_t>(rep)][static_cast<std::size_t>(v)]);
        }
        const double mean = oracles::mean_of(diffs);
        const double se = oracles::standard_error(diffs);
        if (v < early_end && std::abs(mean) > std::max(2.0 * se, 1e-3)) {
            out.early_within_noise = false;
        }
        if (v >= late_start && !(mean > 0.0)) {
            out.late_strictly_above = false;
        }
    }
    return out;
}

} // namespace

TEST_CASE("synthetic protocol ordering, ablation and curve shape", "[protocol][c5][c6][c7]") {
    Stopwatch watch;
    const RunResult& ucb1 = protocol_run("ucb1");
    const RunResult& spucb = protocol_run("spucb");
    const RunResult& ucb1_hp = protocol_run("ucb1_hp");
    const RunResult& ucb1_hpsp = protocol_run("ucb1_hpsp");
    const RunResult& hpspucb = protocol_run("hpspucb");
    const double elapsed = watch.seconds();

    // criterion 5: HpSpUCB beats both baselines, paired gap positive
    {
        const double hp = hpspucb.aggregates.reward_bar;
        const double sp = spucb.aggregates.reward_bar;
        const double u1 = ucb1.aggregates.reward_bar;
        const RunResult& best_baseline = sp >= u1 ? spucb : ucb1;
        std::vector<double> paired;
        for (int rep = 0; rep < hpspucb.repetitions; ++rep) {
            paired.push_back(hpspucb.final_reward_bar_by_rep[static_cast<std::size_t>(rep)] -
                             best_baseline.final_reward_bar_by_rep[static_cast<std::size_t>(rep)]);
        }
        const double gap = oracles::mean_of(paired);
        const bool pass = hp > sp && hp > u1 && gap > 0.0;
        report_line(5, pass,
                    "reward_bar hpspucb " + fmt(hp) + " vs spucb " + fmt(sp) + " vs ucb1 " +
                        fmt(u1) + "; paired gap " + fmt(gap) + "; protocol wall time " +
                        fmt(elapsed) + " s");
        CHECK(hp > sp);
        CHECK(hp > u1);
        CHECK(gap > 0.0);
        CHECK(elapsed < 1800.0);
    }

    // criterion 6: the HP component ablation ordering
    {
        const double hpsp = ucb1_hpsp.aggregates.reward_bar;
        const double hp = ucb1_hp.aggregates.reward_bar;
        const double u1 = ucb1.aggregates.reward_bar;
        const bool pass = hpsp >= hp && hp >= u1;
        report_line(6, pass,
                    "reward_bar ucb1_hpsp " + fmt(hpsp) + " >= ucb1_hp " + fmt(hp) +
                        " >= ucb1 " + fmt(u1));
        CHECK(hpsp >= hp);
        CHECK(hp >= u1);
    }

    // criterion 7: late-stage boost with early-stage parity
    {
        const auto c1 = compare_curves(hpspucb, spucb);
        const auto c2 = compare_curves(ucb1_hp, ucb1);
        const auto c3 = compare_curves(ucb1_hpsp, ucb1);
        const bool pass = c1.early_within_noise && c1.late_strictly_above &&
                          c2.early_within_noise && c2.late_strictly_above &&
                          c3.early_within_noise && c3.late_strictly_above;
        report_line(7, pass,
                    std::string("early parity / late boost: hpspucb|spucb ") +
                        (c1.early_within_noise ? "y" : "n") + "/" +
                        (c1.late_strictly_above ? "y" : "n") + ", ucb1_hp|ucb1 " +
                        (c2.early_within_noise ? "y" : "n") + "/" +
                        (c2.late_strictly_above ? "y" : "n") + ", ucb1_hpsp|ucb1 " +
                        (c3.early_within_noise ? "y" : "n") + "/" +
                        (c3.late_strictly_above ? "y" : "n"));
        CHECK(c1.early_within_noise);
        CHECK(c1.late_strictly_above);
        CHECK(c2.early_within_noise);
        CHECK(c2.late_strictly_above);
        CHECK(c3.early_within_noise);
        CHECK(c3.late_strictly_above);
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("ingestion filters reproduce known counts", "[c8]") {
    GridSpec grid;
    grid.lon_min = -95.800000;
    grid.lon_max = -95.018014;
    grid.lat_min = 29.580562;
    grid.lat_max = 30.112111;

    IngestSchema schema;
    schema.delimiter = '|';
    schema.time_col = "CREATED DATE";
    schema.lat_col = "LATITUDE";
    schema.lon_col = "LONGITUDE";
    schema.category_col = "SR TYPE";
    schema.time_format = "%m/%d/%Y %H:%M";

    IngestFilters filters;
    filters.category = "Flooding";
    filters.start_date = "2017-08-23";
    filters.end_date = "2017-10-02";
    filters.bbox = Rect{-95.800000, -95.018014, 29.580562, 30.112111};

    bool pass = true;
    std::string detail;

    // the real extract is checked whenever it is present
    const char* env_path = std::getenv("HOUSTON_311_PATH");
    const std::string real_path =
        env_path != nullptr ? env_path
                            : std::string(TEST_DATA_DIR) + "/311-Public-Data-Extract-Harvey-clean.txt";
    if (std::filesystem::exists(real_path)) {
        IngestReport report;
        ingest(real_path, schema, filters, grid, &report);
        pass = report.rows_kept == 4315;
        detail = "real extract: kept " + std::to_string(report.rows_kept) + " (want 4315)";
        CHECK(report.rows_kept == 4315);
    } else {
        IngestReport report;
        const auto data = ingest(std::string(TEST_DATA_DIR) + "/calls_fixture.psv", schema,
                                 filters, grid, &report);
        pass = report.rows_total == 21 && report.rows_kept == 12 &&
               report.dropped_category == 2 && report.dropped_date == 2 &&
               report.dropped_bbox == 2 && report.dropped_unparseable == 2 &&
               report.dropped_missing == 1 && data.events.size() == 12;
        detail = "fixture: kept " + std::to_string(report.rows_kept) +
                 "/21 with drop counts cat=2 date=2 bbox=2 parse=2 missing=1";
        CHECK(report.rows_total == 21);
        CHECK(report.rows_kept == 12);
        CHECK(report.dropped_category == 2);
        CHECK(report.dropped_date == 2);
        CHECK(report.dropped_bbox == 2);
        CHECK(report.dropped_unparseable == 2);
        CHECK(report.dropped_missing == 1);
    }
    report_line(8, pass, detail);
}

// ---------------------------------------------------------------------------

TEST_CASE("the run subcommand is byte-deterministic", "[c9]") {
    const auto tmp = std::filesystem::temp_directory_path() / "hpmab_c9";
    std::filesystem::remove_all(tmp);
    std::filesystem::create_directories(tmp);

    const json cfg = {
        {"data",
         {{"synthetic",
           {{"eta", 0.02}, {"phi", 0.6}, {"omega", 0.05}, {"sigma", 0.05}, {"horizon", 300.0}}}}},
        {"grid",
         {{"lon_min", 0.0}, {"lon_max", 1.0}, {"lat_min", 0.0}, {"lat_max", 1.0}, {"X", 5}, {"Y", 5}}},
        {"N", 3},
        {"W", 30.0},
        {"L", 8},
        {"policy", {{"kind", "hpspucb"}, {"sigma_gp", 1.0}}},
        {"mh", {{"burn_in", 50}, {"thin", 2}}},
        {"repetitions", 3},
        {"seed", 99}};
    const auto cfg_path = tmp / "config.json";
    {
        std::ofstream out(cfg_path);
        out << cfg.dump(2);
    }

    auto run_once = [&](const std::string& out_dir) {
        const std::string cmd = std::string(HPMAB_CLI_PATH) + " run --config " +
                                cfg_path.string() + " --out " + out_dir + " > /dev/null";
        return std::system(cmd.c_str());
    };
    const int rc1 = run_once((tmp / "a").string());
    const int rc2 = run_once((tmp / "b").string());

    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    const std::string rows_a = slurp((tmp / "a" / "rows.csv").string());
    const std::string rows_b = slurp((tmp / "b" / "rows.csv").string());
    const std::string cells_a = slurp((tmp / "a" / "cells.csv").string());
    const std::string cells_b = slurp((tmp / "b" / "cells.csv").string());

    const bool pass = rc1 == 0 && rc2 == 0 && !rows_a.empty() && rows_a == rows_b &&
                      cells_a == cells_b;
    report_line(9, pass,
                "two CLI runs, rows.csv " + std::to_string(rows_a.size()) + " bytes, " +
                    (rows_a == rows_b ? "identical" : "DIFFER"));
    CHECK(rc1 == 0);
    CHECK(rc2 == 0);
    CHECK(!rows_a.empty());
    CHECK(rows_a == rows_b);
    CHECK(cells_a == cells_b);
    std::filesystem::remove_all(tmp);
}

// ---------------------------------------------------------------------------

namespace {

// drives two policies over the same replayed dataset with matched seeds and
// collects their per-visit sampling distributions and hp fields
struct TraceResult {
    std::vector<ScoreField> probs;
    std::vector<ScoreField> hp_fields;
    std::vector<std::vector<int>> recs;
};

TraceResult trace_policy(PolicyKind kind, PolicyConfig cfg, const EventDataset& data,
                         const GridSpec& grid, double W, int V, std::uint64_t seed) {
    TraceResult out;
    ReplayEnv env(data, grid, W, V);
    MHConfig mh;
    mh.num_samples = 10;
    mh.burn_in = 50;
    mh.thin = 2;
    BanditPolicy policy(kind, cfg, grid.X, grid.Y, PriorConfig{}, mh, StreamSeeder{seed});
    for (int v = 0; v < V; ++v) {
        const auto rec = policy.recommend();
        out.probs.push_back(policy.last_probs());
        out.hp_fields.push_back(policy.last_hp_field());
        out.recs.push_back(rec);
        const auto obs = env.step(rec);
        policy.observe(obs, env.window(v));
    }
    return out;
}

EventDataset c10_dataset(GridSpec& grid_out) {
    SynthConfig synth;
    synth.eta = 0.03;
    synth.phi = 0.6;
    synth.omega = 0.05;
    synth.sigma = 0.05;
    synth.horizon = 300.0;
    std::mt19937_64 rng(555);
    const auto events = generate_synthetic(synth, rng);
    GridSpec grid;
    grid.X = 5;
    grid.Y = 5;
    grid_out = grid;
    return dataset_from_synthetic(events, synth.horizon);
}

} // namespace

TEST_CASE("equation reductions hold bit-exactly", "[c10]") {
    GridSpec grid;
    const EventDataset data = c10_dataset(grid);
    const double W = 30.0;
    const int V = 10;

    // gamma = 0: HpSpUCB's sampling distribution equals SpUCB's, bit for bit
    bool gamma0_equal = true;
    {
        PolicyConfig hp_cfg;
        hp_cfg.N = 3;
        hp_cfg.gamma = 0.0;
        hp_cfg.tau = 0.8;
        hp_cfg.tau_gp = 0.8; // matched temperatures
        hp_cfg.sigma_gp = 1.0;
        PolicyConfig sp_cfg = hp_cfg;
        const auto a = trace_policy(PolicyKind::hpspucb, hp_cfg, data, grid, W, V, 321);
        const auto b = trace_policy(PolicyKind::spucb, sp_cfg, data, grid, W, V, 321);
        for (int v = 0; v < V; ++v) {
            if (a.probs[static_cast<std::size_t>(v)].values !=
                    b.probs[static_cast<std::size_t>(v)].values ||
                a.recs[static_cast<std::size_t>(v)] != b.recs[static_cast<std::size_t>(v)]) {
                gamma0_equal = false;
            }
        }
    }

    // sigma_gp = 0: UCB1_HpSp's hp field equals UCB1_Hp's, bit for bit
    bool sigma0_equal = true;
    {
        PolicyConfig cfg;
        cfg.N = 3;
        cfg.gamma = 5.0;
        cfg.tau = 1.0;
        cfg.sigma_gp = 0.0; // smoothing disabled
        const auto a = trace_policy(PolicyKind::ucb1_hpsp, cfg, data, grid, W, V, 654);
        const auto b = trace_policy(PolicyKind::ucb1_hp, cfg, data, grid, W, V, 654);
        for (int v = 0; v < V; ++v) {
            if (a.hp_fields[static_cast<std::size_t>(v)].values !=
                    b.hp_fields[static_cast<std::size_t>(v)].values ||
                a.recs[static_cast<std::size_t>(v)] != b.recs[static_cast<std::size_t>(v)]) {
                sigma0_equal = false;
            }
        }
    }

    // zeta_hp = 0: the UCB score collapses to the posterior-mean intensity
    bool zeta0_equal = true;
    {
        MHConfig mh;
        mh.num_samples = 12;
        mh.burn_in = 40;
        mh.thin = 2;
        HawkesTracker tracker(grid.X, grid.Y, 12, PriorConfig{}, mh, StreamSeeder{777});
        tracker.fill_gaps(0, 40.0);
        tracker.assimilate(3, 1, {41.0, 42.5}, {40.0, 60.0});
        tracker.fill_gaps(1, 60.0);
        const ScoreField score = tracker.intensity_ucb(0.0);
        for (int c = 0; c < tracker.num_cells(); ++c) {
            const CellState& cs = tracker.cell(c);
            double mean = 0.0;
            for (std::size_t l = 0; l < cs.posterior.size(); ++l) {
                mean += cs.posterior[l].mu + cs.excitation[l].value;
            }
            mean /= static_cast<double>(cs.posterior.size());
            if (score.values[static_cast<std::size_t>(c)] != mean) {
                zeta0_equal = false;
            }
        }
    }

    const bool pass = gamma0_equal && sigma0_equal && zeta0_equal;
    report_line(10, pass,
                std::string("gamma=0 distribution ") + (gamma0_equal ? "equal" : "DIFFER") +
                    "; sigma_gp=0 hp field " + (sigma0_equal ? "equal" : "DIFFER") +
                    "; zeta_hp=0 mean collapse " + (zeta0_equal ? "equal" : "DIFFER"));
    CHECK(gamma0_equal);
    CHECK(sigma0_equal);
    CHECK(zeta0_equal);
}
