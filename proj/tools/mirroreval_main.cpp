#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mirroreval/harness.hpp"
#include "mirroreval/remote.hpp"
#include "mirroreval/report.hpp"
#include "mirroreval/trace_io.hpp"

namespace {

using namespace mirroreval;

std::vector<ConditionId> parse_conditions(const std::vector<std::string>& names) {
    std::vector<ConditionId> out;
    for (const std::string& n : names) {
        const std::optional<ConditionId> c = condition_from_name(n);
        if (!c) throw CLI::ValidationError("--condition", "unknown condition: " + n);
        out.push_back(*c);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mirror-room episode simulator and evaluation harness"};
    app.require_subcommand(1);

    // --- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run episodes and persist traces, aggregates, and digests");
    std::vector<std::string> condition_names{"E1"};
    std::string backend_name = "perfect_oracle";
    RunConfig cfg;
    std::string remote_url, remote_model;
    run->add_option("--condition", condition_names, "Conditions to run (E1..E5); repeatable")->capture_default_str();
    run->add_option("--backend", backend_name,
                    "perfect_oracle|random_walker|blind_guesser|confabulator|mirror_starer|remote")
        ->capture_default_str();
    run->add_option("--base-seed", cfg.base_seed, "Base seed; episode seeds derive from it")->capture_default_str();
    run->add_option("--seeds", cfg.seeds_per_condition, "Seeds per condition")->capture_default_str();
    run->add_option("--runs", cfg.runs_per_seed, "Runs per seed")->capture_default_str();
    run->add_option("--max-steps", cfg.max_steps, "Step cap per episode")->capture_default_str();
    run->add_option("--out", cfg.output_dir, "Output directory")->required();
    run->add_flag("--save-frames", cfg.save_frames, "Write per-step PNG frames");
    run->add_option("--parallel", cfg.parallel, "Parallel episode workers")->capture_default_str();
    run->add_option("--remote-url", remote_url, "Chat-completions base URL (remote backend)");
    run->add_option("--remote-model", remote_model, "Model id (remote backend)");
    run->add_option("--temperature", cfg.backend.remote.temperature, "Sampling temperature")->capture_default_str();
    run->add_option("--max-retries", cfg.backend.remote.max_retries, "Retries per request")->capture_default_str();
    run->add_option("--timeout", cfg.backend.remote.timeout_seconds, "Request timeout, seconds")
        ->capture_default_str();
    run->add_option("--max-in-flight", cfg.backend.remote.max_in_flight, "Concurrent request bound")
        ->capture_default_str();

    // --- replay ------------------------------------------------------------
    auto* replay_cmd = app.add_subcommand("replay", "Recompute aggregate metrics from a JSONL trace file");
    std::string replay_in;
    replay_cmd->add_option("--in", replay_in, "Trace JSONL file")->required();

    // --- report ------------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "Emit per-condition metric tables from results directories");
    ReportOptions report_opt;
    std::string format = "grid,tsv";
    report_cmd->add_option("--in", report_opt.input_dirs, "Results directories; repeatable")->required();
    report_cmd->add_option("--out", report_opt.output_dir, "Report output directory")->required();
    report_cmd->add_option("--format", format, "Comma-separated: grid, tsv")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            cfg.conditions = parse_conditions(condition_names);
            const std::optional<BackendKind> kind = backend_kind_from_name(backend_name);
            if (!kind) {
                std::cerr << "unknown backend: " << backend_name << "\n";
                return 2;
            }
            cfg.backend.kind = *kind;
            cfg.backend.remote.base_url = remote_url;
            cfg.backend.remote.model_id = remote_model;
            const ExperimentResult result = run_experiment(cfg);
            for (const auto& [condition, agg] : result.aggregates) {
                std::cout << condition_name(condition) << ": " << agg.n_episodes
                          << " episodes, TSA " << format_cell(agg.tsa) << "\n";
            }
            if (result.infrastructure_failures > 0) {
                std::cerr << result.infrastructure_failures
                          << " episode(s) excluded due to infrastructure failures; see infrastructure.json\n";
                return 3;
            }
            return 0;
        }
        if (replay_cmd->parsed()) {
            const AggregateMetrics agg = replay(replay_in);
            std::cout << aggregate_to_json(agg).dump(2) << "\n";
            return 0;
        }
        if (report_cmd->parsed()) {
            report_opt.write_grid = format.find("grid") != std::string::npos;
            report_opt.write_tsv = format.find("tsv") != std::string::npos;
            const std::vector<std::string> files = write_reports(report_opt);
            for (const std::string& f : files) std::cout << f << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
