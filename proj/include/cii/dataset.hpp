#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cii {

struct Dataset {
    std::string name;
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<Eigen::VectorXd> features;
    std::vector<double> responses;
    std::size_t dropped_rows = 0;

    std::size_t size() const { return responses.size(); }
    Eigen::Index dim() const {
        return features.empty() ? 0 : features.front().size();
    }
};

/// Numeric CSV ingestion with a header row. The target column is addressed
/// by name or by zero-based index; rows with missing or unparseable cells
/// are dropped and counted.
Dataset ingest_csv(const std::string& path, const std::string& target_column);

/// FNV-1a digest of the parsed numeric content, for run manifests.
std::uint64_t dataset_digest(const Dataset& d);

}  // namespace cii
