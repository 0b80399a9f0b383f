#include "cii/dataset.hpp"

#include "cii/rng.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cii {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n\"");
    std::size_t b = s.find_last_not_of(" \t\r\n\"");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && ptr == e && std::isfinite(out);
}

}  // namespace

Dataset ingest_csv(const std::string& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file " + path);

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty dataset file " + path);
    std::vector<std::string> columns = split_csv_line(header);
    if (columns.empty()) throw std::runtime_error("missing header row in " + path);

    std::size_t target_idx = columns.size();
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] == target_column) target_idx = j;
    }
    if (target_idx == columns.size()) {
        // fall back to a zero-based column index
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(target_column.data(),
                                         target_column.data() + target_column.size(), idx);
        if (ec == std::errc{} && ptr == target_column.data() + target_column.size() &&
            idx < columns.size()) {
            target_idx = idx;
        } else {
            throw std::runtime_error("target column '" + target_column + "' not found in " +
                                     path);
        }
    }

    Dataset d;
    d.name = std::filesystem::path(path).stem().string();
    d.target_name = columns[target_idx];
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (j != target_idx) d.feature_names.push_back(columns[j]);
    }

    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != columns.size()) {
            ++d.dropped_rows;
            continue;
        }
        Eigen::VectorXd x(static_cast<Eigen::Index>(columns.size() - 1));
        double y = 0.0;
        bool ok = true;
        Eigen::Index k = 0;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v;
            if (!parse_number(cells[j], v)) {
                ok = false;
                break;
            }
            if (j == target_idx) {
                y = v;
            } else {
                x(k++) = v;
            }
        }
        if (!ok) {
            ++d.dropped_rows;
            continue;
        }
        d.features.push_back(std::move(x));
        d.responses.push_back(y);
    }
    if (d.responses.empty()) {
        throw std::runtime_error("no usable rows in " + path);
    }
    return d;
}

std::uint64_t dataset_digest(const Dataset& d) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        __builtin_memcpy(&bits, &v, sizeof bits);
        h ^= bits;
        h *= 0x100000001b3ULL;
    };
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (Eigen::Index j = 0; j < d.features[i].size(); ++j) mix(d.features[i](j));
        mix(d.responses[i]);
    }
    return h;
}

}  // namespace cii
