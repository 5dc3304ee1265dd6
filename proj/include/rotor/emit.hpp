#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace rotor::app {

using Cell = std::variant<double, long long, std::string, bool>;

/// Tabular command result. CSV gets one header row, the data rows, then one
/// record per footer whose first field is the footer name. JSON gets
/// {"meta", "data": [row objects], "extras": {footer name: [values]}}.
struct Result {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::vector<Cell>>> footers;
    std::string summary;
};

enum class Format { Csv, Json };

/// 17 significant digits; "nan" and "inf" spelled out.
std::string format_double(double x);

std::string render_csv(const Result& result);
std::string render_json(const Result& result, const nlohmann::ordered_json& meta);
std::string render(const Result& result, Format format, const nlohmann::ordered_json& meta);

/// Writes the rendered result; throws IoError when the file cannot be written.
void emit(const Result& result, Format format, const nlohmann::ordered_json& meta, const std::filesystem::path& path);

} // namespace rotor::app
