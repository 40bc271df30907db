#pragma once

#include <string>

#include <json.hpp>

#include "modlik/estimators.hpp"
#include "modlik/study.hpp"

namespace modlik {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kReportFormat = "modlik-report";

// JSON mappings. Optional members are omitted when empty, so parsing the output
// of to_json gives back an equal value.
void to_json(nlohmann::json& j, const WeightMode& w);
void from_json(const nlohmann::json& j, WeightMode& w);
void to_json(nlohmann::json& j, const Estimate& e);
void from_json(const nlohmann::json& j, Estimate& e);
void to_json(nlohmann::json& j, const SinusoidParams& p);
void from_json(const nlohmann::json& j, SinusoidParams& p);
void to_json(nlohmann::json& j, const StudyConfig& c);
void from_json(const nlohmann::json& j, StudyConfig& c);
void to_json(nlohmann::json& j, const ReplicateReport& r);
void from_json(const nlohmann::json& j, ReplicateReport& r);
void to_json(nlohmann::json& j, const ResidualReport& r);
void from_json(const nlohmann::json& j, ResidualReport& r);
void to_json(nlohmann::json& j, const ResidualChecks& c);
void to_json(nlohmann::json& j, const ComparisonRow& r);
void from_json(const nlohmann::json& j, ComparisonRow& r);
void to_json(nlohmann::json& j, const Quantiles& q);
void from_json(const nlohmann::json& j, Quantiles& q);
void to_json(nlohmann::json& j, const ComparisonReport& r);
void from_json(const nlohmann::json& j, ComparisonReport& r);

std::string to_string(WeightMode::Kind kind);
WeightMode::Kind weight_kind_from_string(const std::string& text);
std::string to_string(UncertaintyVariant variant);
UncertaintyVariant variant_from_string(const std::string& text);
std::string to_string(Method method);
Method method_from_string(const std::string& text);

// Versioned envelope: format, format_version, tool_version, command, config, result.
nlohmann::json make_document(const std::string& command, nlohmann::json config,
                             nlohmann::json result);

// Serialized form: 2-space indented JSON with a trailing newline.
std::string serialize_document(const nlohmann::json& doc);

// Parses and checks format name and version. Throws FormatError otherwise.
nlohmann::json parse_document(const std::string& text);

}  // namespace modlik
