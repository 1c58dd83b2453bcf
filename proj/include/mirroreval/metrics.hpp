#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mirroreval/world.hpp"

namespace mirroreval {

// One per-timestep record. `action` is absent when the step was a protocol
// no-op (the backend failed to produce a valid output twice).
struct StepRecord {
    int t = 0;
    std::optional<Action> action;
    bool m = false;                    // ego reflection visible this step
    bool mirror_in_view = false;       // raw mirror-surface-in-view bit
    std::optional<ColorLabel> identification;  // nullopt = unknown
    std::optional<ColorLabel> selected_cube;   // nullopt = none
    Pose pose;                         // pose at observation time
    bool bumped = false;
    std::vector<std::string> flags;
};

// The sole input to metric evaluation.
struct EpisodeTrace {
    ConditionId condition = ConditionId::E1;
    ColorLabel c_star = ColorLabel::red;
    int T = 0;
    bool terminated = false;  // C_i: ended with done rather than the step cap
    int tau = 0;              // first done step; == T when not terminated
    std::vector<StepRecord> steps;
    std::optional<ColorLabel> final_decision;  // z_tau; none when not terminated
    std::uint64_t scenario_seed = 0;
    std::string backend_id;
    bool proximity_violation = false;
};

struct TraceValidationError {
    std::string message;
};

// Checks the structural invariants; returns an error message on violation.
std::optional<TraceValidationError> validate_trace(const EpisodeTrace& trace, int max_steps = kDefaultMaxSteps);

struct EpisodeMetrics {
    int tsa = 0;
    int ttd = 0;
    int mcr = 0;
    std::optional<int> mtato;  // undefined unless tsa == 1
    int caal = 0;
    int cr = 0;
    int mgd = 0;
    std::optional<int> sc;     // undefined unless ar_sc_applicable == 1
    int ar_sc_applicable = 0;  // A_i
    int completed = 0;         // C_i

    bool operator==(const EpisodeMetrics&) const = default;
};

EpisodeMetrics episode_metrics(const EpisodeTrace& trace);

// mean +- SEM over the episodes where the metric is defined. SEM uses the
// n-1 divisor and is undefined for n < 2.
struct MetricSummary {
    std::optional<double> mean;
    std::optional<double> sem;
    int n_defined = 0;
};

struct AggregateMetrics {
    int n_episodes = 0;
    MetricSummary tsa, ttd, mcr, mtato, caal, cr, mgd, sc, ar_sc, completed;
    MetricSummary tsa_c;  // TSA over completed episodes only
    std::optional<double> completion_gap;  // tsa_c - tsa
};

AggregateMetrics aggregate(const std::vector<EpisodeMetrics>& episodes);

struct BaselineReport {
    // One marker for the three-cube conditions; two reference points for E5.
    std::vector<double> values;
    bool single_marker = true;
};

BaselineReport chance_baseline(ConditionId condition);

}  // namespace mirroreval
