#include "mirroreval/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mirroreval/trace_io.hpp"

namespace mirroreval {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string baseline_annotation(ConditionId condition) {
    const BaselineReport b = chance_baseline(condition);
    std::ostringstream os;
    if (b.single_marker) {
        os << "# " << condition_name(condition) << " chance TSA baseline: 1/3 = " << fmt4(b.values[0]);
    } else {
        os << "# " << condition_name(condition) << " TSA reference points: 1/10 = " << fmt4(b.values[0])
           << ", 1/11 = " << fmt4(b.values[1]) << " (no single chance marker)";
    }
    return os.str();
}

struct Column {
    const char* name;
    MetricSummary AggregateMetrics::*member;
};

constexpr Column kCoreColumns[] = {
    {"TSA", &AggregateMetrics::tsa},     {"TTD", &AggregateMetrics::ttd}, {"MCR", &AggregateMetrics::mcr},
    {"MTATO", &AggregateMetrics::mtato}, {"CAAL", &AggregateMetrics::caal}, {"CR", &AggregateMetrics::cr},
};

constexpr Column kExtendedColumns[] = {
    {"TSA", &AggregateMetrics::tsa},   {"TSA-C", &AggregateMetrics::tsa_c}, {"MCR", &AggregateMetrics::mcr},
    {"MGD", &AggregateMetrics::mgd},   {"CAAL", &AggregateMetrics::caal},   {"SC", &AggregateMetrics::sc},
    {"AR_SC", &AggregateMetrics::ar_sc},
};

template <std::size_t N>
std::string format_table(ConditionId condition, const std::vector<ReportRow>& rows, const Column (&cols)[N],
                         bool tsv) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> head{"backend"};
    for (const Column& c : cols) head.emplace_back(c.name);
    cells.push_back(head);
    for (const ReportRow& row : rows) {
        std::vector<std::string> line{row.backend};
        for (const Column& c : cols) line.push_back(format_cell(row.metrics.*(c.member)));
        cells.push_back(std::move(line));
    }

    std::ostringstream os;
    os << baseline_annotation(condition) << "\n";
    if (tsv) {
        for (const auto& line : cells) {
            for (std::size_t i = 0; i < line.size(); ++i) os << (i ? "\t" : "") << line[i];
            os << "\n";
        }
        return os.str();
    }
    std::vector<std::size_t> widths(cells[0].size(), 0);
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], line[i].size());
    }
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            os << line[i] << std::string(widths[i] - line[i].size() + (i + 1 < line.size() ? 2 : 0), ' ');
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace

std::string format_cell(const MetricSummary& s) {
    if (!s.mean) return "--";
    return fmt4(*s.mean) + " ± " + (s.sem ? fmt4(*s.sem) : "--");
}

ReportData collect_report_data(const std::vector<std::string>& results_dirs) {
    ReportData data;
    for (const std::string& dir : results_dirs) {
        if (!fs::is_directory(dir)) continue;
        for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            const std::string suffix = ".aggregate.json";
            if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix) continue;
            std::ifstream in(entry.path());
            json j;
            in >> j;
            const std::optional<ConditionId> condition = condition_from_name(j.at("condition").get<std::string>());
            if (!condition) continue;
            ReportRow row;
            row.backend = j.at("backend").get<std::string>();
            row.metrics = aggregate_from_json(j.at("metrics"));
            data[*condition].push_back(std::move(row));
        }
    }
    return data;
}

std::string format_core_table(ConditionId condition, const std::vector<ReportRow>& rows, bool tsv) {
    return format_table(condition, rows, kCoreColumns, tsv);
}

std::string format_extended_table(ConditionId condition, const std::vector<ReportRow>& rows, bool tsv) {
    return format_table(condition, rows, kExtendedColumns, tsv);
}

std::vector<std::string> write_reports(const ReportOptions& opt) {
    const ReportData data = collect_report_data(opt.input_dirs);
    if (data.empty()) throw std::invalid_argument("report: no aggregate files found in the given directories");
    fs::create_directories(opt.output_dir);

    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(opt.output_dir) / name).string();
        std::ofstream out(path, std::ios::trunc);
        out << content;
        written.push_back(path);
    };
    for (const auto& [condition, rows] : data) {
        const std::string c(condition_name(condition));
        if (opt.write_grid) {
            emit("core_" + c + ".txt", format_core_table(condition, rows, false));
            emit("extended_" + c + ".txt", format_extended_table(condition, rows, false));
        }
        if (opt.write_tsv) {
            emit("core_" + c + ".tsv", format_core_table(condition, rows, true));
            emit("extended_" + c + ".tsv", format_extended_table(condition, rows, true));
        }
    }
    return written;
}

}  // namespace mirroreval
