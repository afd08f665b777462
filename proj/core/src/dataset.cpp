#include "roirank/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace fs = std::filesystem;

namespace roirank {

std::string label_name(ClassLabel l) {
    return l == ClassLabel::ADHD ? "ADHD" : "HC";
}

ClassLabel label_from_name(const std::string& name) {
    if (name == "ADHD") return ClassLabel::ADHD;
    if (name == "HC") return ClassLabel::HC;
    throw DataError("unknown class label: " + name);
}

std::vector<std::string> Manifest::sites() const {
    std::set<std::string> s;
    for (const auto& r : records) s.insert(r.site);
    return {s.begin(), s.end()};
}

std::map<std::string, std::map<ClassLabel, std::size_t>>
Manifest::site_class_counts() const {
    std::map<std::string, std::map<ClassLabel, std::size_t>> counts;
    for (const auto& r : records) counts[r.site][r.label]++;
    return counts;
}

Tensor load_series(const std::string& path, const std::string& subject_id) {
    std::ifstream is(path);
    if (!is) throw DataError("missing series file for " + subject_id + ": " + path);
    std::size_t n_rois = 0, time_len = 0;
    std::string header;
    if (!std::getline(is, header)) {
        throw DataError("empty series file for " + subject_id + ": " + path);
    }
    {
        std::istringstream hs(header);
        if (!(hs >> n_rois >> time_len) || n_rois == 0 || time_len == 0) {
            throw DataError("malformed series header for " + subject_id + ": " + path);
        }
        std::string extra;
        if (hs >> extra) {
            throw DataError("malformed series header for " + subject_id + ": " + path);
        }
    }
    Tensor series({n_rois, time_len});
    std::string line;
    for (std::size_t r = 0; r < n_rois; ++r) {
        if (!std::getline(is, line)) {
            throw DataError("series for " + subject_id + " truncated at ROI " +
                            std::to_string(r));
        }
        std::istringstream ls(line);
        for (std::size_t t = 0; t < time_len; ++t) {
            double v;
            if (!(ls >> v)) {
                throw DataError("ragged series row for " + subject_id + " at ROI " +
                                std::to_string(r));
            }
            if (!std::isfinite(v)) {
                throw DataError("non-finite value in series for " + subject_id +
                                " at ROI " + std::to_string(r));
            }
            series.at2(r, t) = v;
        }
        double extra;
        if (ls >> extra) {
            throw DataError("ragged series row for " + subject_id + " at ROI " +
                            std::to_string(r));
        }
    }
    return series;
}

void save_series(const Tensor& series, const std::string& path) {
    if (series.ndim() != 2) throw ShapeError("save_series: expects [N_R x T]");
    std::ofstream os(path);
    if (!os) throw DataError("cannot write series file: " + path);
    os.precision(17);
    os << series.extent(0) << " " << series.extent(1) << "\n";
    for (std::size_t r = 0; r < series.extent(0); ++r) {
        for (std::size_t t = 0; t < series.extent(1); ++t) {
            if (t) os << " ";
            os << series.at2(r, t);
        }
        os << "\n";
    }
}

Manifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("missing manifest file: " + path);
    const fs::path base = fs::path(path).parent_path();

    Manifest m;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    bool header_done = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (!header_done) {
            header_done = true;  // first non-empty line is the header
            continue;
        }
        std::istringstream ls(line);
        std::string id, site, label, series_path;
        if (!std::getline(ls, id, ',') || !std::getline(ls, site, ',') ||
            !std::getline(ls, label, ',') || !std::getline(ls, series_path)) {
            throw DataError("malformed manifest row: " + line);
        }
        if (!seen_ids.insert(id).second) {
            throw DataError("duplicate subject_id in manifest: " + id);
        }
        SubjectRecord rec;
        rec.subject_id = id;
        rec.site = site;
        rec.label = label_from_name(label);
        rec.series_path = series_path;
        rec.series = load_series((base / series_path).string(), id);
        m.records.push_back(std::move(rec));
    }
    if (m.records.empty()) throw DataError("empty manifest: " + path);
    return m;
}

void save_manifest(const Manifest& manifest, const std::string& dir,
                   const std::string& manifest_name) {
    fs::create_directories(dir);
    fs::create_directories(fs::path(dir) / "series");
    std::ofstream os(fs::path(dir) / manifest_name);
    if (!os) throw DataError("cannot write manifest in " + dir);
    os << "subject_id,site,label,series_path\n";
    for (const auto& r : manifest.records) {
        std::string rel = r.series_path.empty()
                              ? ("series/" + r.subject_id + ".txt")
                              : r.series_path;
        os << r.subject_id << "," << r.site << "," << label_name(r.label) << ","
           << rel << "\n";
        save_series(r.series, (fs::path(dir) / rel).string());
    }
}

ValidationReport validate_dataset(const Manifest& manifest) {
    ValidationReport report;
    if (manifest.records.empty()) {
        report.violations.push_back("empty dataset");
        return report;
    }
    std::unordered_set<std::string> ids;
    std::size_t shared_rois = manifest.records.front().n_rois();
    for (const auto& r : manifest.records) {
        if (!ids.insert(r.subject_id).second) {
            report.violations.push_back("duplicate subject_id: " + r.subject_id);
        }
        if (r.n_rois() != shared_rois) {
            report.violations.push_back(
                "mixed ROI count: " + r.subject_id + " has " +
                std::to_string(r.n_rois()) + ", expected " +
                std::to_string(shared_rois));
        }
        if (r.time_len() < 17) {
            report.violations.push_back("series too short for " + r.subject_id +
                                        ": T=" + std::to_string(r.time_len()));
        }
        if (!r.series.all_finite()) {
            report.violations.push_back("non-finite values in series of " +
                                        r.subject_id);
        }
    }
    for (const auto& [site, counts] : manifest.site_class_counts()) {
        if (counts.count(ClassLabel::ADHD) == 0) {
            report.warnings.push_back("class-absent: site " + site +
                                      " has no ADHD subjects");
        }
        if (counts.count(ClassLabel::HC) == 0) {
            report.warnings.push_back("class-absent: site " + site +
                                      " has no HC subjects");
        }
    }
    return report;
}

std::vector<LosoFold> loso_split(const Manifest& manifest) {
    auto sites = manifest.sites();
    if (sites.size() < 2) {
        throw DataError("loso_split requires at least 2 sites, got " +
                        std::to_string(sites.size()));
    }
    std::vector<LosoFold> folds;
    for (const auto& site : sites) {
        LosoFold fold;
        fold.test_site = site;
        for (std::size_t i = 0; i < manifest.records.size(); ++i) {
            if (manifest.records[i].site == site) {
                fold.test_indices.push_back(i);
            } else {
                fold.train_indices.push_back(i);
            }
        }
        folds.push_back(std::move(fold));
    }
    return folds;
}

}  // namespace roirank
