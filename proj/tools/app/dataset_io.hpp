#pragma once

// Reading and writing datasets and reports.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "qmem/fitting.hpp"
#include "qmem/measurement.hpp"

namespace qmem::app {

enum class OutputFormat { Csv, Json };

/// Header "<sweep>,probability[,shot_fraction,shots]", one record per line.
std::string dataset_to_csv(const Dataset& data);
nlohmann::json dataset_to_json(const Dataset& data);

/// Throws ConfigError with the offending line number.
Dataset dataset_from_csv(const std::string& text, const std::string& source);
Dataset dataset_from_json(const nlohmann::json& j);
/// Picks the reader from the extension (.json, otherwise CSV).
Dataset load_dataset(const std::filesystem::path& path);

nlohmann::json fit_to_json(const FitResult& fit);
std::string fit_to_csv(const FitResult& fit);

/// Writes through a temporary sibling and renames, so a failed run leaves no
/// partial file behind.
/// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(const std::string& s);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace qmem::app
