#include "roirank/report.hpp"

#include <fstream>
#include <sstream>

namespace roirank {

ReportFormat format_from_name(const std::string& name) {
    if (name == "table") return ReportFormat::Table;
    if (name == "plotdata") return ReportFormat::Plotdata;
    throw ConfigError("unknown report format: " + name);
}

namespace {

std::string fmt17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string join_indices(const std::vector<std::size_t>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << " ";
        os << v[i];
    }
    return os.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write report file: " + path);
    return os;
}

void write_metadata(std::ostream& os,
                    const std::map<std::string, std::string>& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << " = " << v << "\n";
}

std::map<std::string, std::string> eval_metadata(const EvalReport& r,
                                                 const std::string& kind) {
    std::map<std::string, std::string> meta = r.config_echo;
    meta["kind"] = kind;
    meta["roi_order"] = join_indices(r.roi_subset);
    std::ostringstream sites;
    for (std::size_t i = 0; i < r.per_site.size(); ++i) {
        if (i) sites << ";";
        sites << r.per_site[i].first << "=" << fmt17(r.per_site[i].second);
    }
    meta["per_site"] = sites.str();
    meta["mean_accuracy"] = fmt17(r.mean_accuracy);
    return meta;
}

}  // namespace

void export_report(const EvalReport& report, const std::string& path,
                   ReportFormat format) {
    auto os = open_out(path);
    if (format == ReportFormat::Plotdata) {
        write_metadata(os, eval_metadata(report, "eval"));
        os << "x,y\n";
        for (std::size_t i = 0; i < report.per_site.size(); ++i) {
            os << i << "," << fmt17(report.per_site[i].second) << "\n";
        }
        return;
    }
    os << "LOSO evaluation report\n";
    os << "======================\n";
    for (const auto& [k, v] : report.config_echo) os << k << ": " << v << "\n";
    os << "roi_order: " << join_indices(report.roi_subset) << "\n\n";
    for (const auto& [site, acc] : report.per_site) {
        os << "  " << site << ": " << fmt17(acc) << "\n";
    }
    os << "  mean: " << fmt17(report.mean_accuracy) << "\n";
}

void export_report(const RankingResult& ranking, const std::string& path,
                   ReportFormat format) {
    std::map<std::string, std::string> meta;
    if (!ranking.reports.empty()) meta = ranking.reports.front().config_echo;
    meta["kind"] = "ranking";
    meta["rank_order"] = join_indices(ranking.rank_order);
    auto os = open_out(path);
    if (format == ReportFormat::Plotdata) {
        write_metadata(os, meta);
        os << "x,y\n";
        for (const auto& [roi, acc] : ranking.per_roi_accuracy) {
            os << roi << "," << fmt17(acc) << "\n";
        }
        return;
    }
    os << "Single-ROI ranking\n";
    os << "==================\n";
    for (const auto& [k, v] : meta) {
        if (k != "kind") os << k << ": " << v << "\n";
    }
    os << "\nrank  roi  mean_accuracy\n";
    for (std::size_t rank = 0; rank < ranking.rank_order.size(); ++rank) {
        const std::size_t roi = ranking.rank_order[rank];
        double acc = 0;
        for (const auto& [r, a] : ranking.per_roi_accuracy) {
            if (r == roi) acc = a;
        }
        os << "  " << (rank + 1) << "  " << roi << "  " << fmt17(acc) << "\n";
    }
}

void export_report(const SweepResult& sweep, const std::string& path,
                   ReportFormat format) {
    std::map<std::string, std::string> meta;
    if (!sweep.points.empty()) meta = sweep.points.front().second.config_echo;
    meta["kind"] = "sweep";
    meta["direction"] = direction_name(sweep.direction);
    auto os = open_out(path);
    if (format == ReportFormat::Plotdata) {
        write_metadata(os, meta);
        os << "x,y\n";
        for (const auto& [k, report] : sweep.points) {
            os << k << "," << fmt17(report.mean_accuracy) << "\n";
        }
        return;
    }
    os << "Rank-ordered sweep (" << direction_name(sweep.direction) << ")\n";
    os << "==========================\n";
    for (const auto& [k, v] : meta) {
        if (k != "kind") os << k << ": " << v << "\n";
    }
    os << "\nk  mean_accuracy  roi_subset\n";
    for (const auto& [k, report] : sweep.points) {
        os << "  " << k << "  " << fmt17(report.mean_accuracy) << "  "
           << join_indices(report.roi_subset) << "\n";
    }
}

Plotdata parse_plotdata(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open plotdata file: " + path);
    Plotdata pd;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                std::string value = line.substr(eq + 1);
                auto trim = [](std::string& s) {
                    s.erase(0, s.find_first_not_of(" \t"));
                    s.erase(s.find_last_not_of(" \t") + 1);
                };
                trim(key);
                trim(value);
                pd.metadata[key] = value;
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // x,y column header
            continue;
        }
        std::istringstream ls(line);
        double x, y;
        char comma;
        if (!(ls >> x >> comma >> y) || comma != ',') {
            throw DataError("malformed plotdata row in " + path + ": " + line);
        }
        pd.rows.emplace_back(x, y);
    }
    return pd;
}

RankingResult load_ranking(const std::string& path) {
    Plotdata pd = parse_plotdata(path);
    if (pd.metadata.count("kind") && pd.metadata["kind"] != "ranking") {
        throw DataError("not a ranking file: " + path);
    }
    RankingResult r;
    for (const auto& [x, y] : pd.rows) {
        r.per_roi_accuracy.emplace_back(static_cast<std::size_t>(x), y);
    }
    if (r.per_roi_accuracy.empty()) throw DataError("empty ranking file: " + path);
    r.rank_order = RankingResult::derive_order(r.per_roi_accuracy);
    return r;
}

}  // namespace roirank
