#pragma once

#include "roirank/protocols.hpp"

namespace roirank {

enum class ReportFormat { Table, Plotdata };

ReportFormat format_from_name(const std::string& name);

/// Writes one result file. `plotdata` is a comma-separated numeric series
/// (x = ROI index or k, y = accuracy) with `#` metadata lines carrying the
/// config echo; `table` is a human-readable summary. Accuracies are printed
/// with 17 significant digits so export -> parse is lossless.
void export_report(const EvalReport& report, const std::string& path,
                   ReportFormat format);
void export_report(const RankingResult& ranking, const std::string& path,
                   ReportFormat format);
void export_report(const SweepResult& sweep, const std::string& path,
                   ReportFormat format);

struct Plotdata {
    std::map<std::string, std::string> metadata;
    std::vector<std::pair<double, double>> rows;
};

Plotdata parse_plotdata(const std::string& path);

/// Rebuilds a RankingResult (accuracies and derived rank order; per-fold
/// reports are not round-tripped) from its plotdata export.
RankingResult load_ranking(const std::string& path);

}  // namespace roirank
