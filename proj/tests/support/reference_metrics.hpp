#pragma once

#include "mirroreval/metrics.hpp"

namespace mirroreval::testing {

// Independent brute-force evaluator. Re-derives every episode metric with
// naive scans, coded separately from the production path; the oracle side of
// the metric-equivalence suite.
EpisodeMetrics reference_episode_metrics(const EpisodeTrace& trace);

// Long-double mean/SEM reference for aggregation checks.
struct ReferenceSummary {
    bool has_mean = false;
    long double mean = 0;
    bool has_sem = false;
    long double sem = 0;
    int n = 0;
};
ReferenceSummary reference_summary(const std::vector<double>& values);

}  // namespace mirroreval::testing
