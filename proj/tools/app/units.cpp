#include "app/units.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <span>
#include <utility>

#include "app/config.hpp"

namespace qmem::app {

namespace {

constexpr std::array<std::pair<std::string_view, double>, 4> kTimeUnits{{
    {"s", 1.0},
    {"ms", 1e-3},
    {"us", 1e-6},
    {"ns", 1e-9},
}};

constexpr std::array<std::pair<std::string_view, double>, 4> kFrequencyUnits{{
    {"Hz", 1.0},
    {"kHz", 1e3},
    {"MHz", 1e6},
    {"GHz", 1e9},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

double parse_number(std::string_view text, std::string_view field) {
  const std::string_view t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(std::string(field) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

double parse_quantity(std::string_view text, Dimension dim, std::string_view field, bool allow_inf) {
  const std::string_view t = trim(text);
  if (t == "inf") {
    if (!allow_inf) throw ConfigError(std::string(field) + ": infinity is not allowed here");
    return std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr == t.data()) {
    throw ConfigError(std::string(field) + ": cannot read a number from '" + std::string(text) + "'");
  }
  const std::string_view unit = trim(std::string_view(ptr, t.data() + t.size() - ptr));
  if (unit.empty()) {
    throw ConfigError(std::string(field) + ": '" + std::string(text) + "' needs a unit suffix");
  }
  const auto& table = dim == Dimension::Time ? std::span<const std::pair<std::string_view, double>>(kTimeUnits)
                                             : std::span<const std::pair<std::string_view, double>>(kFrequencyUnits);
  for (const auto& [name, scale] : table) {
    if (unit == name) return v * scale;
  }
  throw ConfigError(std::string(field) + ": unknown " + (dim == Dimension::Time ? "time" : "frequency") +
                    " unit '" + std::string(unit) + "'");
}

double quantity_from_json(const nlohmann::json& value, Dimension dim, std::string_view field, bool allow_inf) {
  if (!value.is_string()) {
    throw ConfigError(std::string(field) + ": expected a string with a unit, e.g. \"" +
                      (dim == Dimension::Time ? "1.4 ms" : "500 kHz") + "\"");
  }
  return parse_quantity(value.get<std::string>(), dim, field, allow_inf);
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

}  // namespace qmem::app
