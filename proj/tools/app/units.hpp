#pragma once

// Unit-suffixed physical quantities ("1.4 ms", "500 kHz", "inf") and
// locale-independent number formatting.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace qmem::app {

enum class Dimension { Time, Frequency };

/// Parses "<number> <unit>" into SI. "inf" is accepted for times only when
/// `allow_inf` is set. Throws ConfigError naming `field` on failure.
double parse_quantity(std::string_view text, Dimension dim, std::string_view field, bool allow_inf = false);

/// Reads a quantity from a JSON string value; bare numbers are rejected.
double quantity_from_json(const nlohmann::json& value, Dimension dim, std::string_view field,
                          bool allow_inf = false);

/// Shortest round-tripping decimal form ("inf" for infinity).
std::string format_double(double x);

/// Plain number parse via from_chars. Throws ConfigError naming `field`.
double parse_number(std::string_view text, std::string_view field);

}  // namespace qmem::app
