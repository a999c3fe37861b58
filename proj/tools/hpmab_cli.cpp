// Command-line front end: synthetic data generation, raw-extract ingestion,
// single experiments, hyperparameter sweeps and report aggregation.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hpmab/hpmab.hpp"

namespace {

using nlohmann::json;

int fail_with_errors(const std::vector<std::string>& errors) {
    json j;
    j["errors"] = errors;
    std::cerr << j.dump() << "\n";
    return 1;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> policy;
    int parallel = 1;
};

hpmab::ExperimentConfig load_config(const CommonOpts& opts, json* raw = nullptr) {
    auto in = hpmab::open_input(opts.config_path);
    json j = json::parse(in);
    std::vector<std::string> errors;
    auto cfg = hpmab::parse_experiment_config(j, errors);
    if (!cfg) {
        throw std::invalid_argument(json{{"errors", errors}}.dump());
    }
    if (opts.seed) {
        cfg->seed = *opts.seed;
    }
    if (opts.policy) {
        cfg->kind = hpmab::policy_kind_from_string(*opts.policy);
    }
    if (raw != nullptr) {
        *raw = std::move(j);
    }
    return *cfg;
}

int cmd_simulate(const CommonOpts& opts) {
    const auto cfg = load_config(opts);
    if (!cfg.synthetic) {
        return fail_with_errors({"simulate requires a data.synthetic section"});
    }
    hpmab::StreamSeeder seeder{cfg.seed};
    auto rng = seeder.stream(hpmab::RngUse::data_gen);
    const auto events = hpmab::generate_synthetic(*cfg.synthetic, rng);
    std::filesystem::create_directories(opts.out_dir);
    const std::string path = opts.out_dir + "/events.csv";
    hpmab::write_synthetic_csv(events, path);
    std::cout << "wrote " << events.size() << " events to " << path << "\n";
    return 0;
}

int cmd_ingest(const CommonOpts& opts) {
    const auto cfg = load_config(opts);
    if (!cfg.ingest_cfg) {
        return fail_with_errors({"ingest requires a data.ingest section"});
    }
    hpmab::IngestReport report;
    const auto data = hpmab::ingest(cfg.ingest_cfg->path, cfg.ingest_cfg->schema,
                                    cfg.ingest_cfg->filters, cfg.grid, &report);
    std::filesystem::create_directories(opts.out_dir);
    hpmab::write_canonical_csv(data, opts.out_dir + "/events.csv");
    auto rep_out = hpmab::open_output(opts.out_dir + "/ingest_report.txt");
    rep_out << report.to_string();
    std::cout << report.to_string();
    if (report.rows_kept == 0) {
        std::cerr << "warning: no rows kept after filtering\n";
    }
    std::cout << "wrote " << report.rows_kept << " events to " << opts.out_dir
              << "/events.csv\n";
    return 0;
}

int cmd_run(const CommonOpts& opts, const std::string& dump_state_path) {
    auto cfg = load_config(opts);
    const auto result = hpmab::run_experiment(cfg, opts.parallel);
    hpmab::write_run_outputs(result, opts.out_dir);
    if (!dump_state_path.empty() && hpmab::policy_uses_tracker(cfg.kind)) {
        // re-run repetition 0 to capture the tracker end state
        const auto data = hpmab::materialize_dataset(cfg);
        hpmab::ReplayEnv env(data, cfg.grid, cfg.W, cfg.visits());
        hpmab::StreamSeeder rep_seeder{
            hpmab::StreamSeeder{cfg.seed}.derive(hpmab::rundetail::kRepTag, 0)};
        hpmab::BanditPolicy policy(cfg.kind, cfg.policy, cfg.grid.X, cfg.grid.Y, cfg.priors,
                                   cfg.mh, rep_seeder);
        for (int v = 0; v < cfg.visits(); ++v) {
            const auto rec = policy.recommend();
            const auto obs = env.step(rec);
            policy.observe(obs, env.window(v));
        }
        auto dump = hpmab::open_output(dump_state_path);
        policy.tracker()->dump_state(dump);
    }
    std::cout << "policy " << result.policy_name << ": reward_bar="
              << hpmab::format_double(result.aggregates.reward_bar)
              << " ndcg=" << hpmab::format_double(result.aggregates.ndcg)
              << " mrhr=" << hpmab::format_double(result.aggregates.mrhr) << " over "
              << result.repetitions << " repetitions x " << result.visits << " visits\n";
    std::cout << "outputs in " << opts.out_dir << " (rows.csv, cells.csv, summary.json)\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    json raw;
    const auto cfg = load_config(opts, &raw);
    std::vector<std::string> errors;
    const auto spec = hpmab::parse_sweep_spec(raw, cfg, errors);
    if (!errors.empty()) {
        return fail_with_errors(errors);
    }
    const auto points = hpmab::run_sweep(cfg, spec, opts.parallel);
    std::vector<std::string> param_names;
    for (const auto& [key, values] : spec.param_grid) {
        param_names.push_back(key);
    }
    hpmab::write_sweep_outputs(points, param_names, opts.out_dir);
    std::size_t failures = 0;
    for (const auto& p : points) {
        if (!p.ok) {
            ++failures;
        }
    }
    std::cout << "swept " << points.size() << " configurations (" << failures
              << " failed); outputs in " << opts.out_dir << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    hpmab::write_report(run_dirs, out_dir);
    std::cout << "report written to " << out_dir
              << " (report_summary.csv, report_series.csv, report_cells.csv)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hawkes-process multi-armed bandit toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string dump_state_path;
    std::vector<std::string> report_inputs;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", opts.config_path, "experiment config JSON");
        if (needs_config) {
            c->required()->check(CLI::ExistingFile);
        }
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--seed", [&](const CLI::results_t& res) {
            opts.seed = std::stoull(res[0]);
            return true;
        }, "master seed override")->expected(1);
        cmd->add_option("--policy", [&](const CLI::results_t& res) {
            opts.policy = res[0];
            return true;
        }, "policy kind override")->expected(1);
        cmd->add_option("--parallel", opts.parallel, "worker threads for repetitions");
    };

    auto* simulate = app.add_subcommand("simulate", "write a synthetic event CSV");
    add_common(simulate, true);
    auto* ingest = app.add_subcommand("ingest", "raw extract -> canonical CSV + report");
    add_common(ingest, true);
    auto* run = app.add_subcommand("run", "run one experiment");
    add_common(run, true);
    run->add_option("--dump-state", dump_state_path,
                    "write the repetition-0 tracker end state to this file");
    auto* sweep = app.add_subcommand("sweep", "grid search over policy parameters");
    add_common(sweep, true);
    auto* report = app.add_subcommand("report", "aggregate run outputs");
    report->add_option("runs", report_inputs, "run output directories")->required();
    report->add_option("--out", opts.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return cmd_simulate(opts);
        }
        if (ingest->parsed()) {
            return cmd_ingest(opts);
        }
        if (run->parsed()) {
            return cmd_run(opts, dump_state_path);
        }
        if (sweep->parsed()) {
            return cmd_sweep(opts);
        }
        if (report->parsed()) {
            return cmd_report(report_inputs, opts.out_dir);
        }
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        if (!what.empty() && what.front() == '{') {
            std::cerr << what << "\n"; // already a machine-readable error list
        } else {
            std::cerr << nlohmann::json{{"errors", {what}}}.dump() << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"errors", {std::string(e.what())}}}.dump() << "\n";
        return 1;
    }
    return 0;
}
