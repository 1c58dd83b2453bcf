#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mirroreval/metrics.hpp"
#include "mirroreval/world.hpp"

namespace mirroreval {

inline constexpr int kTraceSchemaVersion = 1;

// One persisted episode: the trace plus everything needed to audit it.
struct EpisodeRecord {
    EpisodeTrace trace;
    ScenarioConfig scenario;
    std::vector<std::string> frame_digests;  // per step, fnv1a64 hex ("" when not rendered)
    std::string prompts_hash;                // fnv1a64 hex over all prompt bytes
    nlohmann::json backend_config;           // backend snapshot (kind, remote settings)
    int seed_index = 0;
    int run_index = 0;
    std::string retry_policy = "reprompt_once_then_noop";
};

nlohmann::json scenario_to_json(const ScenarioConfig& s);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const EpisodeRecord& r);
EpisodeRecord record_from_json(const nlohmann::json& j);

nlohmann::json summary_to_json(const MetricSummary& s);
MetricSummary summary_from_json(const nlohmann::json& j);

nlohmann::json aggregate_to_json(const AggregateMetrics& a);
AggregateMetrics aggregate_from_json(const nlohmann::json& j);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace mirroreval
