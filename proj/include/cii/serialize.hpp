#pragma once

#include "cii/conformal.hpp"
#include "cii/uncertain.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace cii {

/// P-box wire record: lower_breakpoints / lower_levels / upper_breakpoints /
/// upper_levels arrays plus the input row index.
nlohmann::json pbox_to_json(const PBox& box);
PBox pbox_from_json(const nlohmann::json& j);

/// Newline-delimited p-box file, one object per prediction. Records without
/// an explicit "index" field take their line number.
void write_pbox_file(const std::string& path, const std::map<std::size_t, PBox>& by_row);
std::map<std::size_t, PBox> read_pbox_file(const std::string& path);

/// Locale-independent shortest round-trip formatting for doubles.
std::string format_double(double v);

/// Full fitted-model record: distance statistics, band coefficients,
/// support constraint, calibration records, and base-predictor parameters.
/// Externally ingested bases cannot be embedded and raise an error.
nlohmann::json model_to_json(const CiiModel& m);
CiiModel model_from_json(const nlohmann::json& j);

void write_model_file(const std::string& path, const CiiModel& m);
CiiModel read_model_file(const std::string& path);

}  // namespace cii
