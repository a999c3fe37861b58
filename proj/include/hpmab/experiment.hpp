#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hpmab/bayes.hpp"
#include "hpmab/environment.hpp"
#include "hpmab/hawkes.hpp"
#include "hpmab/io.hpp"
#include "hpmab/metrics.hpp"
#include "hpmab/policies.hpp"
#include "hpmab/random.hpp"

namespace hpmab {

using nlohmann::json;

struct IngestConfig {
    std::string path;
    IngestSchema schema;
    IngestFilters filters;
};

/// Everything one experiment needs: data source, grid, protocol constants,
/// policy + inference configuration, repetitions and the master seed.
struct ExperimentConfig {
    std::optional<SynthConfig> synthetic;
    std::string dataset_path;      // canonical CSV; used when synthetic is absent
    double dataset_horizon = 0.0;  // seconds; required for dataset sources
    std::optional<IngestConfig> ingest_cfg;

    GridSpec grid;
    int N = 5;
    double W = 0.0;
    int L = 50;
    PolicyKind kind = PolicyKind::hpspucb;
    PolicyConfig policy;
    PriorConfig priors;
    MHConfig mh;
    int repetitions = 10;
    std::uint64_t seed = 0;

    [[nodiscard]] double horizon() const {
        return synthetic ? synthetic->horizon : dataset_horizon;
    }
    [[nodiscard]] int visits() const { return static_cast<int>(std::floor(horizon() / W)); }
};

namespace cfgdetail {

inline double get_num(const json& j, const std::string& key, double fallback,
                      std::vector<std::string>& errors, bool required = false) {
    if (!j.contains(key)) {
        if (required) {
            errors.push_back("missing required field: " + key);
        }
        return fallback;
    }
    if (!j.at(key).is_number()) {
        errors.push_back("field is not a number: " + key);
        return fallback;
    }
    return j.at(key).get<double>();
}

inline std::string get_str(const json& j, const std::string& key, const std::string& fallback,
                           std::vector<std::string>& errors, bool required = false) {
    if (!j.contains(key)) {
        if (required) {
            errors.push_back("missing required field: " + key);
        }
        return fallback;
    }
    if (!j.at(key).is_string()) {
        errors.push_back("field is not a string: " + key);
        return fallback;
    }
    return j.at(key).get<std::string>();
}

} // namespace cfgdetail

/// Parses and validates an experiment config; collects every problem instead
/// of stopping at the first one.
inline std::optional<ExperimentConfig> parse_experiment_config(const json& j,
                                                               std::vector<std::string>& errors) {
    using cfgdetail::get_num;
    using cfgdetail::get_str;
    ExperimentConfig cfg;

    if (!j.contains("data") || !j.at("data").is_object()) {
        errors.push_back("missing required object: data");
    } else {
        const json& data = j.at("data");
        if (data.contains("synthetic")) {
            const json& s = data.at("synthetic");
            SynthConfig sc;
            sc.eta = get_num(s, "eta", 0.0, errors, true);
            sc.phi = get_num(s, "phi", 0.0, errors, true);
            sc.omega = get_num(s, "omega", 1.0, errors, true);
            sc.sigma = get_num(s, "sigma", 0.0, errors, true);
            sc.horizon = get_num(s, "horizon", 0.0, errors, true);
            if (s.contains("domain")) {
                const json& d = s.at("domain");
                sc.domain.x_min = get_num(d, "x_min", 0.0, errors);
                sc.domain.x_max = get_num(d, "x_max", 1.0, errors);
                sc.domain.y_min = get_num(d, "y_min", 0.0, errors);
                sc.domain.y_max = get_num(d, "y_max", 1.0, errors);
            }
            cfg.synthetic = sc;
        } else if (data.contains("dataset")) {
            const json& d = data.at("dataset");
            cfg.dataset_path = get_str(d, "path", "", errors, true);
            cfg.dataset_horizon = get_num(d, "horizon", 0.0, errors, true);
        } else {
            errors.push_back("data must contain either 'synthetic' or 'dataset'");
        }
        if (data.contains("ingest")) {
            const json& g = data.at("ingest");
            IngestConfig ic;
            ic.path = get_str(g, "path", "", errors, true);
            const std::string delim = get_str(g, "delimiter", "|", errors);
            ic.schema.delimiter = delim.empty() ? '|' : delim[0];
            ic.schema.time_col = get_str(g, "time_col", "", errors, true);
            ic.schema.lat_col = get_str(g, "lat_col", "", errors, true);
            ic.schema.lon_col = get_str(g, "lon_col", "", errors, true);
            ic.schema.category_col = get_str(g, "category_col", "", errors);
            ic.schema.time_format = get_str(g, "time_format", "%m/%d/%Y %H:%M", errors);
            ic.filters.category = get_str(g, "category", "", errors);
            ic.filters.start_date = get_str(g, "start_date", "", errors);
            ic.filters.end_date = get_str(g, "end_date", "", errors);
            if (g.contains("bbox")) {
                const json& b = g.at("bbox");
                Rect r;
                r.x_min = get_num(b, "lon_min", 0.0, errors, true);
                r.x_max = get_num(b, "lon_max", 1.0, errors, true);
                r.y_min = get_num(b, "lat_min", 0.0, errors, true);
                r.y_max = get_num(b, "lat_max", 1.0, errors, true);
                ic.filters.bbox = r;
            }
            cfg.ingest_cfg = ic;
        }
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        cfg.grid.lon_min = get_num(g, "lon_min", 0.0, errors);
        cfg.grid.lon_max = get_num(g, "lon_max", 1.0, errors);
        cfg.grid.lat_min = get_num(g, "lat_min", 0.0, errors);
        cfg.grid.lat_max = get_num(g, "lat_max", 1.0, errors);
        cfg.grid.X = static_cast<int>(get_num(g, "X", 10, errors));
        cfg.grid.Y = static_cast<int>(get_num(g, "Y", 10, errors));
    }

    cfg.N = static_cast<int>(get_num(j, "N", 5, errors, true));
    cfg.W = get_num(j, "W", 0.0, errors, true);
    cfg.L = static_cast<int>(get_num(j, "L", 50, errors));
    cfg.repetitions = static_cast<int>(get_num(j, "repetitions", 10, errors));
    cfg.seed = static_cast<std::uint64_t>(get_num(j, "seed", 0, errors));

    if (!j.contains("policy") || !j.at("policy").is_object()) {
        errors.push_back("missing required object: policy");
    } else {
        const json& p = j.at("policy");
        const std::string kind = get_str(p, "kind", "", errors, true);
        if (!kind.empty()) {
            try {
                cfg.kind = policy_kind_from_string(kind);
            } catch (const std::exception& e) {
                errors.push_back(e.what());
            }
        }
        cfg.policy.epsilon = get_num(p, "epsilon", cfg.policy.epsilon, errors);
        cfg.policy.zeta_ucb = get_num(p, "zeta_ucb", cfg.policy.zeta_ucb, errors);
        cfg.policy.zeta_gp = get_num(p, "zeta_gp", cfg.policy.zeta_gp, errors);
        cfg.policy.tau_gp = get_num(p, "tau_gp", cfg.policy.tau_gp, errors);
        cfg.policy.sigma_gp = get_num(p, "sigma_gp", cfg.policy.sigma_gp, errors);
        cfg.policy.gamma = get_num(p, "gamma", cfg.policy.gamma, errors);
        cfg.policy.tau = get_num(p, "tau", cfg.policy.tau, errors);
        cfg.policy.zeta_hp = get_num(p, "zeta_hp", cfg.policy.zeta_hp, errors);
        cfg.policy.gp_jitter = get_num(p, "gp_jitter", cfg.policy.gp_jitter, errors);
    }
    if (j.contains("priors")) {
        const json& p = j.at("priors");
        cfg.priors.k_p = get_num(p, "k_p", cfg.priors.k_p, errors);
        cfg.priors.k_c = get_num(p, "k_c", cfg.priors.k_c, errors);
        cfg.priors.m = get_num(p, "m", cfg.priors.m, errors);
        cfg.priors.n = get_num(p, "n", cfg.priors.n, errors);
    }
    if (j.contains("mh")) {
        const json& p = j.at("mh");
        cfg.mh.burn_in = static_cast<int>(get_num(p, "burn_in", cfg.mh.burn_in, errors));
        cfg.mh.thin = static_cast<int>(get_num(p, "thin", cfg.mh.thin, errors));
        const double scale = get_num(p, "proposal_scale", 0.5, errors);
        cfg.mh.proposal_scales = {scale, scale, scale};
        if (p.contains("adapt")) {
            cfg.mh.adapt_during_burn_in = p.at("adapt").get<bool>();
        }
    }
    cfg.mh.num_samples = cfg.L;
    cfg.policy.N = cfg.N;

    // semantic validation, still collecting
    try {
        cfg.grid.validate();
        if (cfg.N < 1 || cfg.N > cfg.grid.n_cells()) {
            errors.push_back("N must satisfy 1 <= N <= X*Y");
        }
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }
    if (!(cfg.W > 0.0)) {
        errors.push_back("W must be > 0");
    }
    if (cfg.L < 1) {
        errors.push_back("L must be >= 1");
    }
    if (cfg.repetitions < 1) {
        errors.push_back("repetitions must be >= 1");
    }
    if (cfg.synthetic) {
        try {
            cfg.synthetic->validate();
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    } else if (cfg.dataset_path.empty() && !cfg.ingest_cfg) {
        errors.push_back("dataset source needs a path (or an ingest section)");
    }
    if (!errors.empty()) {
        return std::nullopt;
    }
    if (cfg.W > 0.0 && cfg.horizon() > 0.0 && cfg.visits() < 1) {
        errors.push_back("horizon shorter than one window: V = floor(T/W) < 1");
        return std::nullopt;
    }
    try {
        cfg.priors.validate();
        cfg.mh.validate();
        cfg.policy.validate(cfg.grid.n_cells());
    } catch (const std::exception& e) {
        errors.push_back(e.what());
        return std::nullopt;
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    auto in = open_input(path);
    json j = json::parse(in);
    std::vector<std::string> errors;
    auto cfg = parse_experiment_config(j, errors);
    if (!cfg) {
        std::string msg = "invalid config " + path + ":";
        for (const auto& e : errors) {
            msg += "\n  - " + e;
        }
        throw std::invalid_argument(msg);
    }
    return *cfg;
}

// ---------------------------------------------------------------------------

struct VisitRow {
    int rep = 0;
    int visit = 0;
    std::vector<int> recommended;
    double reward = 0.0;
    double ndcg = 0.0;
    double mrhr = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    double norm_prc = 0.0;
    double avg_norm_prc = 0.0;
    double cum_reward_bar = 0.0;
};

struct RunAggregates {
    double reward_bar = 0.0; // mean over reps of the final cumulative value
    double ndcg = 0.0;
    double mrhr = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    double norm_prc = 0.0;
    double avg_norm_prc = 0.0;
};

struct RunResult {
    std::string policy_name;
    int repetitions = 0;
    int visits = 0;
    int n_per_visit = 0;
    double total_events = 0.0;
    std::uint64_t seed = 0;
    std::vector<VisitRow> rows; // repetitions x visits, rep-major
    RunAggregates aggregates;
    std::vector<double> cum_reward_bar_by_visit; // mean over reps
    std::vector<double> final_reward_bar_by_rep;
    std::vector<double> cell_event_count; // ground truth over [0, V*W)
    std::vector<double> cell_mean_visits; // mean visits per repetition
    int grid_x = 0;
    int grid_y = 0;
};

inline EventDataset materialize_dataset(const ExperimentConfig& cfg) {
    if (cfg.synthetic) {
        StreamSeeder seeder{cfg.seed};
        auto rng = seeder.stream(RngUse::data_gen);
        const auto events = generate_synthetic(*cfg.synthetic, rng);
        return dataset_from_synthetic(events, cfg.synthetic->horizon);
    }
    if (!cfg.dataset_path.empty()) {
        EventDataset data = read_canonical_csv(cfg.dataset_path);
        data.period = TimeWindow{0.0, cfg.dataset_horizon};
        return data;
    }
    if (cfg.ingest_cfg) {
        return ingest(cfg.ingest_cfg->path, cfg.ingest_cfg->schema, cfg.ingest_cfg->filters,
                      cfg.grid);
    }
    throw std::invalid_argument("experiment config has no data source");
}

namespace rundetail {

constexpr std::uint64_t kRepTag = 0x52455031ULL;

inline std::vector<VisitRow> run_single_repetition(const ExperimentConfig& cfg,
                                                   const EventDataset& data, int rep,
                                                   std::vector<int>* visit_counts) {
    const int V = cfg.visits();
    ReplayEnv env(data, cfg.grid, cfg.W, V);
    StreamSeeder rep_seeder{StreamSeeder{cfg.seed}.derive(rundetail::kRepTag,
                                                          static_cast<std::uint64_t>(rep))};
    BanditPolicy policy(cfg.kind, cfg.policy, cfg.grid.X, cfg.grid.Y, cfg.priors, cfg.mh,
                        rep_seeder);
    std::vector<VisitRow> rows;
    rows.reserve(static_cast<std::size_t>(V));
    double cum_reward = 0.0;
    for (int v = 0; v < V; ++v) {
        const std::vector<int> rec = policy.recommend();
        const auto observations = env.step(rec);
        double reward = 0.0;
        for (const auto& obs : observations) {
            reward += obs.reward;
        }
        cum_reward += reward;
        const RankedResult rr(rec, env.true_gains(v).values);
        VisitRow row;
        row.rep = rep;
        row.visit = v;
        row.recommended = rec;
        row.reward = reward;
        row.ndcg = ndcg_at_n(rr);
        row.mrhr = mrhr(rr);
        const Prf p = prf(rr);
        row.recall = p.recall;
        row.precision = p.precision;
        row.f1 = p.f1;
        row.norm_prc = norm_precision(rr);
        row.avg_norm_prc = avg_norm_precision(rr);
        row.cum_reward_bar = reward_bar(cum_reward, env.total_events());
        rows.push_back(std::move(row));
        if (visit_counts != nullptr) {
            for (int cell : rec) {
                (*visit_counts)[static_cast<std::size_t>(cell)] += 1;
            }
        }
        policy.observe(observations, env.window(v));
    }
    return rows;
}

} // namespace rundetail

/// Runs the full bandit protocol: `repetitions` independent repetitions with
/// per-repetition derived rng streams over a shared dataset, emitting one row
/// per (repetition, visit) plus aggregates.
inline RunResult run_experiment(const ExperimentConfig& cfg, int parallel = 1) {
    const EventDataset data = materialize_dataset(cfg);
    const int V = cfg.visits();
    if (V < 1) {
        throw std::invalid_argument("run_experiment: horizon shorter than one window");
    }

    RunResult result;
    result.policy_name = to_string(cfg.kind);
    result.repetitions = cfg.repetitions;
    result.visits = V;
    result.n_per_visit = cfg.N;
    result.seed = cfg.seed;
    result.grid_x = cfg.grid.X;
    result.grid_y = cfg.grid.Y;

    const int R = cfg.repetitions;
    std::vector<std::vector<VisitRow>> rep_rows(static_cast<std::size_t>(R));
    std::vector<std::vector<int>> rep_visit_counts(
        static_cast<std::size_t>(R), std::vector<int>(static_cast<std::size_t>(cfg.grid.n_cells()), 0));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(R));

    const int workers = std::max(1, std::min(parallel, R));
    std::atomic<int> next{0};
    auto work = [&]() {
        while (true) {
            const int rep = next.fetch_add(1);
            if (rep >= R) {
                return;
            }
            try {
                rep_rows[static_cast<std::size_t>(rep)] = rundetail::run_single_repetition(
                    cfg, data, rep, &rep_visit_counts[static_cast<std::size_t>(rep)]);
            } catch (...) {
                failures[static_cast<std::size_t>(rep)] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }

    ReplayEnv env(data, cfg.grid, cfg.W, V); // ground-truth cell counts
    result.total_events = env.total_events();
    result.cell_event_count.assign(static_cast<std::size_t>(cfg.grid.n_cells()), 0.0);
    for (int v = 0; v < V; ++v) {
        for (int c = 0; c < cfg.grid.n_cells(); ++c) {
            result.cell_event_count[static_cast<std::size_t>(c)] +=
                env.true_gains(v).values[static_cast<std::size_t>(c)];
        }
    }
    result.cell_mean_visits.assign(static_cast<std::size_t>(cfg.grid.n_cells()), 0.0);
    for (int rep = 0; rep < R; ++rep) {
        for (int c = 0; c < cfg.grid.n_cells(); ++c) {
            result.cell_mean_visits[static_cast<std::size_t>(c)] +=
                static_cast<double>(rep_visit_counts[static_cast<std::size_t>(rep)]
                                                    [static_cast<std::size_t>(c)]) /
                static_cast<double>(R);
        }
    }

    result.cum_reward_bar_by_visit.assign(static_cast<std::size_t>(V), 0.0);
    RunAggregates agg;
    for (int rep = 0; rep < R; ++rep) {
        const auto& rows = rep_rows[static_cast<std::size_t>(rep)];
        RunAggregates rep_means;
        for (const auto& row : rows) {
            rep_means.ndcg += row.ndcg;
            rep_means.mrhr += row.mrhr;
            rep_means.recall += row.recall;
            rep_means.precision += row.precision;
            rep_means.f1 += row.f1;
            rep_means.norm_prc += row.norm_prc;
            rep_means.avg_norm_prc += row.avg_norm_prc;
            result.cum_reward_bar_by_visit[static_cast<std::size_t>(row.visit)] +=
                row.cum_reward_bar / static_cast<double>(R);
        }
        const double nv = static_cast<double>(rows.size());
        agg.ndcg += rep_means.ndcg / nv;
        agg.mrhr += rep_means.mrhr / nv;
        agg.recall += rep_means.recall / nv;
        agg.precision += rep_means.precision / nv;
        agg.f1 += rep_means.f1 / nv;
        agg.norm_prc += rep_means.norm_prc / nv;
        agg.avg_norm_prc += rep_means.avg_norm_prc / nv;
        const double final_bar = rows.empty() ? 0.0 : rows.back().cum_reward_bar;
        agg.reward_bar += final_bar;
        result.final_reward_bar_by_rep.push_back(final_bar);
        for (auto& row : rep_rows[static_cast<std::size_t>(rep)]) {
            result.rows.push_back(std::move(row));
        }
    }
    const double dr = static_cast<double>(R);
    result.aggregates = RunAggregates{agg.reward_bar / dr, agg.ndcg / dr,     agg.mrhr / dr,
                                      agg.recall / dr,     agg.precision / dr, agg.f1 / dr,
                                      agg.norm_prc / dr,   agg.avg_norm_prc / dr};
    return result;
}

// ---------------------------------------------------------------------------
// Result files

inline std::string join_cells(const std::vector<int>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            out.push_back(';');
        }
        out += std::to_string(cells[i]);
    }
    return out;
}

inline const char* kRowsHeader =
    "rep,visit,policy,recommended,reward,ndcg,mrhr,recall,precision,f1,norm_prc,avg_norm_prc,"
    "cum_reward_bar";

inline void write_rows_csv(const RunResult& result, const std::string& path) {
    auto out = open_output(path);
    out << kRowsHeader << "\n";
    for (const auto& row : result.rows) {
        out << row.rep << ',' << row.visit << ',' << result.policy_name << ','
            << join_cells(row.recommended) << ',' << format_double(row.reward) << ','
            << format_double(row.ndcg) << ',' << format_double(row.mrhr) << ','
            << format_double(row.recall) << ',' << format_double(row.precision) << ','
            << format_double(row.f1) << ',' << format_double(row.norm_prc) << ','
            << format_double(row.avg_norm_prc) << ',' << format_double(row.cum_reward_bar)
            << "\n";
    }
}

inline void write_cells_csv(const RunResult& result, const std::string& path) {
    auto out = open_output(path);
    out << "cell,x,y,event_count,mean_visits\n";
    for (std::size_t c = 0; c < result.cell_event_count.size(); ++c) {
        out << c << ',' << (c % static_cast<std::size_t>(result.grid_x)) << ','
            << (c / static_cast<std::size_t>(result.grid_x)) << ','
            << format_double(result.cell_event_count[c]) << ','
            << format_double(result.cell_mean_visits[c]) << "\n";
    }
}

inline json summary_json(const RunResult& result) {
    json j;
    j["policy"] = result.policy_name;
    j["repetitions"] = result.repetitions;
    j["visits"] = result.visits;
    j["N"] = result.n_per_visit;
    j["seed"] = result.seed;
    j["total_events"] = result.total_events;
    j["metrics"] = {{"reward_bar", result.aggregates.reward_bar},
                    {"ndcg", result.aggregates.ndcg},
                    {"mrhr", result.aggregates.mrhr},
                    {"recall", result.aggregates.recall},
                    {"precision", result.aggregates.precision},
                    {"f1", result.aggregates.f1},
                    {"norm_prc", result.aggregates.norm_prc},
                    {"avg_norm_prc", result.aggregates.avg_norm_prc}};
    j["final_reward_bar_by_rep"] = result.final_reward_bar_by_rep;
    j["cum_reward_bar_by_visit"] = result.cum_reward_bar_by_visit;
    return j;
}

inline void write_run_outputs(const RunResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_rows_csv(result, out_dir + "/rows.csv");
    write_cells_csv(result, out_dir + "/cells.csv");
    auto out = open_output(out_dir + "/summary.json");
    out << summary_json(result).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepPoint {
    PolicyKind kind = PolicyKind::hpspucb;
    std::map<std::string, double> overrides;
    RunAggregates metrics;
    bool ok = false;
    std::string error;
};

struct SweepSpec {
    std::vector<PolicyKind> kinds;
    std::map<std::string, std::vector<double>> param_grid; // policy fields
};

inline SweepSpec parse_sweep_spec(const json& j, const ExperimentConfig& base,
                                  std::vector<std::string>& errors) {
    SweepSpec spec;
    if (!j.contains("sweep") || !j.at("sweep").is_object()) {
        errors.push_back("missing required object: sweep");
        return spec;
    }
    const json& s = j.at("sweep");
    if (s.contains("kinds")) {
        for (const auto& k : s.at("kinds")) {
            try {
                spec.kinds.push_back(policy_kind_from_string(k.get<std::string>()));
            } catch (const std::exception& e) {
                errors.push_back(e.what());
            }
        }
    }
    if (spec.kinds.empty()) {
        spec.kinds.push_back(base.kind);
    }
    if (s.contains("params") && s.at("params").is_object()) {
        for (const auto& [key, values] : s.at("params").items()) {
            std::vector<double> vals;
            if (!values.is_array() || values.empty()) {
                errors.push_back("sweep param must be a non-empty array: " + key);
                continue;
            }
            for (const auto& v : values) {
                if (!v.is_number()) {
                    errors.push_back("sweep param values must be numbers: " + key);
                    break;
                }
                vals.push_back(v.get<double>());
            }
            spec.param_grid[key] = vals;
        }
    }
    return spec;
}

inline void apply_policy_override(PolicyConfig& cfg, const std::string& key, double value) {
    if (key == "epsilon") {
        cfg.epsilon = value;
    } else if (key == "zeta_ucb") {
        cfg.zeta_ucb = value;
    } else if (key == "zeta_gp") {
        cfg.zeta_gp = value;
    } else if (key == "tau_gp") {
        cfg.tau_gp = value;
    } else if (key == "sigma_gp") {
        cfg.sigma_gp = value;
    } else if (key == "gamma") {
        cfg.gamma = value;
    } else if (key == "tau") {
        cfg.tau = value;
    } else if (key == "zeta_hp") {
        cfg.zeta_hp = value;
    } else {
        throw std::invalid_argument("unknown sweep parameter: " + key);
    }
}

/// Runs every (kind x param grid) combination; failures are recorded per
/// point and the sweep continues.
inline std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, const SweepSpec& spec,
                                         int parallel = 1) {
    std::vector<SweepPoint> points;
    std::vector<std::pair<std::string, std::vector<double>>> grid(spec.param_grid.begin(),
                                                                  spec.param_grid.end());
    std::vector<std::size_t> idx(grid.size(), 0);
    for (PolicyKind kind : spec.kinds) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            SweepPoint point;
            point.kind = kind;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                point.overrides[grid[g].first] = grid[g].second[idx[g]];
            }
            points.push_back(std::move(point));
            std::size_t g = 0;
            for (; g < grid.size(); ++g) {
                if (++idx[g] < grid[g].second.size()) {
                    break;
                }
                idx[g] = 0;
            }
            if (grid.empty() || g == grid.size()) {
                break;
            }
        }
    }
    for (auto& point : points) {
        try {
            ExperimentConfig cfg = base;
            cfg.kind = point.kind;
            for (const auto& [key, value] : point.overrides) {
                apply_policy_override(cfg.policy, key, value);
            }
            const RunResult r = run_experiment(cfg, parallel);
            point.metrics = r.aggregates;
            point.ok = true;
        } catch (const std::exception& e) {
            point.ok = false;
            point.error = e.what();
        }
    }
    return points;
}

inline void write_sweep_outputs(const std::vector<SweepPoint>& points,
                                const std::vector<std::string>& param_names,
                                const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto table = open_output(out_dir + "/sweep_table.csv");
    table << "policy";
    for (const auto& p : param_names) {
        table << ',' << p;
    }
    table << ",status,reward_bar,ndcg,mrhr,recall,precision,f1,norm_prc,avg_norm_prc\n";
    for (const auto& pt : points) {
        table << to_string(pt.kind);
        for (const auto& p : param_names) {
            const auto it = pt.overrides.find(p);
            table << ',' << (it == pt.overrides.end() ? "" : format_double(it->second));
        }
        table << ',' << (pt.ok ? "ok" : "error");
        if (pt.ok) {
            table << ',' << format_double(pt.metrics.reward_bar) << ','
                  << format_double(pt.metrics.ndcg) << ',' << format_double(pt.metrics.mrhr)
                  << ',' << format_double(pt.metrics.recall) << ','
                  << format_double(pt.metrics.precision) << ',' << format_double(pt.metrics.f1)
                  << ',' << format_double(pt.metrics.norm_prc) << ','
                  << format_double(pt.metrics.avg_norm_prc) << "\n";
        } else {
            table << ",,,,,,,,\n";
        }
    }

    const std::vector<std::pair<std::string, double RunAggregates::*>> metric_fields = {
        {"reward_bar", &RunAggregates::reward_bar}, {"ndcg", &RunAggregates::ndcg},
        {"mrhr", &RunAggregates::mrhr},             {"recall", &RunAggregates::recall},
        {"precision", &RunAggregates::precision},   {"f1", &RunAggregates::f1},
        {"norm_prc", &RunAggregates::norm_prc},     {"avg_norm_prc", &RunAggregates::avg_norm_prc}};
    auto best = open_output(out_dir + "/best_by_metric.csv");
    best << "metric,policy,params,value\n";
    for (const auto& [name, field] : metric_fields) {
        const SweepPoint* best_pt = nullptr;
        for (const auto& pt : points) {
            if (pt.ok && (best_pt == nullptr || pt.metrics.*field > best_pt->metrics.*field)) {
                best_pt = &pt;
            }
        }
        if (best_pt == nullptr) {
            continue;
        }
        std::string params;
        for (const auto& [key, value] : best_pt->overrides) {
            if (!params.empty()) {
                params += ';';
            }
            params += key + "=" + format_double(value);
        }
        best << name << ',' << to_string(best_pt->kind) << ',' << csv_quote(params) << ','
             << format_double(best_pt->metrics.*field) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Report: aggregate one or more run outputs into plot-ready CSV series.

struct LoadedRun {
    std::string label;
    std::string policy;
    int repetitions = 0;
    int visits = 0;
    std::vector<VisitRow> rows;
    std::vector<double> cell_event_count;
    std::vector<double> cell_mean_visits;
};

inline LoadedRun load_run_dir(const std::string& dir) {
    LoadedRun run;
    run.label = std::filesystem::path(dir).filename().string();
    auto in = open_input(dir + "/rows.csv");
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty rows.csv in " + dir);
    }
    if (split_delimited(line, ',') != split_delimited(kRowsHeader, ',')) {
        throw std::runtime_error("unexpected rows.csv header in " + dir);
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto f = split_delimited(line, ',');
        if (f.size() != 13) {
            throw std::runtime_error(dir + "/rows.csv line " + std::to_string(line_no) +
                                     ": expected 13 fields");
        }
        VisitRow row;
        double rep = 0.0;
        double visit = 0.0;
        bool ok = parse_double(f[0], rep) && parse_double(f[1], visit) &&
                  parse_double(f[4], row.reward) && parse_double(f[5], row.ndcg) &&
                  parse_double(f[6], row.mrhr) && parse_double(f[7], row.recall) &&
                  parse_double(f[8], row.precision) && parse_double(f[9], row.f1) &&
                  parse_double(f[10], row.norm_prc) && parse_double(f[11], row.avg_norm_prc) &&
                  parse_double(f[12], row.cum_reward_bar);
        if (!ok) {
            throw std::runtime_error(dir + "/rows.csv line " + std::to_string(line_no) +
                                     ": numeric parse failure");
        }
        row.rep = static_cast<int>(rep);
        row.visit = static_cast<int>(visit);
        for (const auto& cell : split_delimited(f[3], ';')) {
            if (!cell.empty()) {
                row.recommended.push_back(std::stoi(cell));
            }
        }
        run.policy = f[2];
        run.repetitions = std::max(run.repetitions, row.rep + 1);
        run.visits = std::max(run.visits, row.visit + 1);
        run.rows.push_back(std::move(row));
    }
    if (std::filesystem::exists(dir + "/cells.csv")) {
        auto cin = open_input(dir + "/cells.csv");
        std::getline(cin, line); // header
        while (std::getline(cin, line)) {
            if (line.empty()) {
                continue;
            }
            const auto f = split_delimited(line, ',');
            double events = 0.0;
            double visits = 0.0;
            if (f.size() != 5 || !parse_double(f[3], events) || !parse_double(f[4], visits)) {
                throw std::runtime_error(dir + "/cells.csv: bad row");
            }
            run.cell_event_count.push_back(events);
            run.cell_mean_visits.push_back(visits);
        }
    }
    return run;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("spearman_correlation: need two equal series, length >= 2");
    }
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
                ++j;
            }
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) {
                r[order[k]] = avg;
            }
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(ra.size());
    mb /= static_cast<double>(rb.size());
    double num = 0.0;
    double da = 0.0;
    double db = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    const double denom = std::sqrt(da * db);
    return denom == 0.0 ? 0.0 : num / denom;
}

/// Aggregates run directories into per-policy summary rows, per-visit mean
/// cumulative reward series, and per-cell count tables with an event/visit
/// rank-correlation column.
inline void write_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    if (run_dirs.empty()) {
        throw std::invalid_argument("write_report: need at least one run directory");
    }
    std::vector<LoadedRun> runs;
    runs.reserve(run_dirs.size());
    for (const auto& dir : run_dirs) {
        runs.push_back(load_run_dir(dir));
    }
    std::filesystem::create_directories(out_dir);

    auto summary = open_output(out_dir + "/report_summary.csv");
    summary
        << "run,policy,repetitions,visits,reward_bar,ndcg,mrhr,recall,precision,f1,norm_prc,"
           "avg_norm_prc,reward_bar_se,ndcg_se,mrhr_se,recall_se,precision_se,f1_se,"
           "norm_prc_se,avg_norm_prc_se\n";
    for (const auto& run : runs) {
        // per-repetition means first; the summary row reports their mean and
        // standard error across repetitions
        std::vector<std::vector<double>> per_rep(
            8, std::vector<double>(static_cast<std::size_t>(run.repetitions), 0.0));
        std::vector<int> rep_rows(static_cast<std::size_t>(run.repetitions), 0);
        for (const auto& row : run.rows) {
            const auto rep = static_cast<std::size_t>(row.rep);
            per_rep[1][rep] += row.ndcg;
            per_rep[2][rep] += row.mrhr;
            per_rep[3][rep] += row.recall;
            per_rep[4][rep] += row.precision;
            per_rep[5][rep] += row.f1;
            per_rep[6][rep] += row.norm_prc;
            per_rep[7][rep] += row.avg_norm_prc;
            rep_rows[rep] += 1;
            if (row.visit == run.visits - 1) {
                per_rep[0][rep] = row.cum_reward_bar;
            }
        }
        for (std::size_t rep = 0; rep < per_rep[0].size(); ++rep) {
            for (std::size_t m = 1; m < 8; ++m) {
                per_rep[m][rep] /= static_cast<double>(rep_rows[rep]);
            }
        }
        auto mean_of = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) {
                s += x;
            }
            return s / static_cast<double>(v.size());
        };
        auto se_of = [&](const std::vector<double>& v) {
            if (v.size() < 2) {
                return 0.0;
            }
            const double m = mean_of(v);
            double acc = 0.0;
            for (double x : v) {
                acc += (x - m) * (x - m);
            }
            return std::sqrt(acc / static_cast<double>(v.size())) /
                   std::sqrt(static_cast<double>(v.size()));
        };
        summary << csv_quote(run.label) << ',' << run.policy << ',' << run.repetitions << ','
                << run.visits;
        for (std::size_t m = 0; m < 8; ++m) {
            summary << ',' << format_double(mean_of(per_rep[m]));
        }
        for (std::size_t m = 0; m < 8; ++m) {
            summary << ',' << format_double(se_of(per_rep[m]));
        }
        summary << "\n";
    }

    auto series = open_output(out_dir + "/report_series.csv");
    series << "run,policy,visit,mean_cum_reward_bar\n";
    for (const auto& run : runs) {
        std::vector<double> mean_bar(static_cast<std::size_t>(run.visits), 0.0);
        for (const auto& row : run.rows) {
            mean_bar[static_cast<std::size_t>(row.visit)] +=
                row.cum_reward_bar / static_cast<double>(run.repetitions);
        }
        for (int v = 0; v < run.visits; ++v) {
            series << csv_quote(run.label) << ',' << run.policy << ',' << v << ','
                   << format_double(mean_bar[static_cast<std::size_t>(v)]) << "\n";
        }
    }

    auto cells = open_output(out_dir + "/report_cells.csv");
    cells << "run,policy,cell,event_count,mean_visits,event_visit_rank_correlation\n";
    for (const auto& run : runs) {
        if (run.cell_event_count.empty()) {
            continue;
        }
        const double corr =
            spearman_correlation(run.cell_event_count, run.cell_mean_visits);
        for (std::size_t c = 0; c < run.cell_event_count.size(); ++c) {
            cells << csv_quote(run.label) << ',' << run.policy << ',' << c << ','
                  << format_double(run.cell_event_count[c]) << ','
                  << format_double(run.cell_mean_visits[c]) << ',' << format_double(corr)
                  << "\n";
        }
    }
}

} // namespace hpmab
