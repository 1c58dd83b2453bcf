#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mirroreval/agents.hpp"
#include "mirroreval/metrics.hpp"
#include "mirroreval/trace_io.hpp"

namespace mirroreval {

class RemoteClient;

struct RunConfig {
    std::vector<ConditionId> conditions;
    BackendSpec backend;
    std::uint64_t base_seed = 0;
    int seeds_per_condition = 3;
    int runs_per_seed = 7;  // 3 x 7 = 21 episodes per condition by default
    int max_steps = kDefaultMaxSteps;
    std::string output_dir;
    bool save_frames = false;
    int parallel = 1;
    // Frames are rendered and digested by default. Policy-level bulk tests
    // may switch this off; remote backends require it.
    bool render_frames = true;
};

// Every episode is individually reproducible from these indices alone.
std::uint64_t derive_episode_seed(std::uint64_t base_seed, ConditionId condition, int seed_index, int run_index);

struct EpisodeRunOptions {
    bool render_frames = true;
    bool save_frames = false;
    std::string frame_dir;  // used when save_frames is set
    int max_steps = kDefaultMaxSteps;
};

// Runs the control loop to completion. Throws BackendUnavailable on remote
// infrastructure failure (the episode is excluded, not scored).
EpisodeRecord run_episode(const ScenarioConfig& scenario, const BackendSpec& backend,
                          std::shared_ptr<RemoteClient> remote, const EpisodeRunOptions& opt = {});

// Same control loop with a caller-supplied backend instance.
EpisodeRecord run_episode_with(Backend& agent, const ScenarioConfig& scenario, const EpisodeRunOptions& opt = {});

struct ExperimentResult {
    std::map<ConditionId, AggregateMetrics> aggregates;
    std::map<ConditionId, std::vector<EpisodeMetrics>> episodes;
    int infrastructure_failures = 0;
    std::vector<std::string> failure_messages;
};

// Runs seeds x runs episodes per condition, persists one JSONL per condition
// plus an aggregate JSON, and returns the in-memory aggregates.
ExperimentResult run_experiment(const RunConfig& cfg);

// Recomputes aggregate metrics from a persisted JSONL file, without
// re-simulation. Throws on schema mismatch or empty input.
AggregateMetrics replay(const std::string& trace_file);

std::string trace_file_path(const std::string& output_dir, ConditionId condition);
std::string aggregate_file_path(const std::string& output_dir, ConditionId condition);

std::string digest_hex(std::uint64_t h);

}  // namespace mirroreval
