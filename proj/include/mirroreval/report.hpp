#pragma once

#include <map>
#include <string>
#include <vector>

#include "mirroreval/metrics.hpp"

namespace mirroreval {

struct ReportRow {
    std::string backend;
    AggregateMetrics metrics;
};

// condition -> rows (one per results directory / backend)
using ReportData = std::map<ConditionId, std::vector<ReportRow>>;

// Collects *.aggregate.json files from each results directory.
ReportData collect_report_data(const std::vector<std::string>& results_dirs);

// "0.6667 ± 0.3333"; "--" for undefined values, "± --" for n < 2.
std::string format_cell(const MetricSummary& s);

// Core columns: TSA TTD MCR MTATO CAAL CR.
std::string format_core_table(ConditionId condition, const std::vector<ReportRow>& rows, bool tsv);
// Extended columns: TSA TSA-C MCR MGD CAAL SC AR_SC.
std::string format_extended_table(ConditionId condition, const std::vector<ReportRow>& rows, bool tsv);

struct ReportOptions {
    std::vector<std::string> input_dirs;
    std::string output_dir;
    bool write_tsv = true;
    bool write_grid = true;
};

// Writes per-condition core and extended tables; returns the file paths.
std::vector<std::string> write_reports(const ReportOptions& opt);

}  // namespace mirroreval
