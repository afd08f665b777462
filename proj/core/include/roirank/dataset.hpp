#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "roirank/tensor.hpp"

namespace roirank {

enum class ClassLabel { ADHD, HC };

std::string label_name(ClassLabel l);
ClassLabel label_from_name(const std::string& name);

/// One subject: site, label and the ROI x time matrix of BOLD means.
struct SubjectRecord {
    std::string subject_id;
    std::string site;
    ClassLabel label = ClassLabel::HC;
    Tensor series;  // [N_R x T]
    std::string series_path;  // relative, as written in the manifest

    std::size_t n_rois() const { return series.extent(0); }
    std::size_t time_len() const { return series.extent(1); }
};

struct Manifest {
    std::vector<SubjectRecord> records;

    std::vector<std::string> sites() const;
    std::map<std::string, std::map<ClassLabel, std::size_t>> site_class_counts() const;
    std::size_t size() const { return records.size(); }
};

/// Text manifest: header line, then `subject_id,site,label,series_path`
/// rows; series paths are relative to the manifest's directory.
Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& manifest, const std::string& dir,
                   const std::string& manifest_name = "manifest.csv");

/// Series file: header `N_R T`, then N_R whitespace-separated rows of T values.
Tensor load_series(const std::string& path, const std::string& subject_id);
void save_series(const Tensor& series, const std::string& path);

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool clean() const { return violations.empty(); }
};

ValidationReport validate_dataset(const Manifest& manifest);

struct LosoFold {
    std::string test_site;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

/// One fold per site; the held-out site is the test set.
std::vector<LosoFold> loso_split(const Manifest& manifest);

}  // namespace roirank
