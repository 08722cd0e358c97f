#include "app/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "app/config.hpp"
#include "app/units.hpp"

namespace qmem::app {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(std::string("dataset: missing array '") + key + "'");
  std::vector<double> v;
  for (const json& x : j.at(key)) {
    if (!x.is_number()) throw ConfigError(std::string("dataset.") + key + ": expected numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream out;
  const bool shots = data.shots_per_point.has_value();
  out << data.sweep_name << ",probability" << (shots ? ",shot_fraction,shots" : "") << '\n';
  for (std::size_t i = 0; i < data.sweep_values.size(); ++i) {
    out << format_double(data.sweep_values[i]) << ',' << format_double(data.probability[i]);
    if (shots) out << ',' << format_double(data.shot_fraction[i]) << ',' << *data.shots_per_point;
    out << '\n';
  }
  return out.str();
}

json dataset_to_json(const Dataset& data) {
  json j;
  j["sweep_name"] = data.sweep_name;
  j["sweep_values"] = data.sweep_values;
  j["probability"] = data.probability;
  if (data.shots_per_point) {
    j["shots_per_point"] = *data.shots_per_point;
    j["shot_fraction"] = data.shot_fraction;
  }
  return j;
}

Dataset dataset_from_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(source + ": empty dataset");
  const auto header = split(line, ',');
  const bool shots = header.size() == 4 && header[2] == "shot_fraction" && header[3] == "shots";
  if (!(header.size() == 2 || shots) || header[0].empty() || header[1] != "probability") {
    throw ConfigError(source + ":1: expected header '<sweep>,probability[,shot_fraction,shots]'");
  }
  Dataset d;
  d.sweep_name = header[0];
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) throw ConfigError(where + ": expected " + std::to_string(header.size()) + " fields");
    d.sweep_values.push_back(parse_number(cells[0], where));
    d.probability.push_back(parse_number(cells[1], where));
    if (shots) {
      d.shot_fraction.push_back(parse_number(cells[2], where));
      const double n = parse_number(cells[3], where);
      if (n < 1 || n != static_cast<int>(n)) throw ConfigError(where + ": shots must be a positive integer");
      if (d.shots_per_point && *d.shots_per_point != static_cast<int>(n)) {
        throw ConfigError(where + ": shots differ between records");
      }
      d.shots_per_point = static_cast<int>(n);
    }
  }
  try {
    d.validate();
  } catch (const DomainError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return d;
}

Dataset dataset_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("dataset: expected an object");
  Dataset d;
  if (!j.contains("sweep_name") || !j.at("sweep_name").is_string()) throw ConfigError("dataset: missing 'sweep_name'");
  d.sweep_name = j.at("sweep_name").get<std::string>();
  d.sweep_values = numbers(j, "sweep_values");
  d.probability = numbers(j, "probability");
  if (j.contains("shots_per_point")) {
    if (!j.at("shots_per_point").is_number_integer()) throw ConfigError("dataset.shots_per_point: expected an integer");
    d.shots_per_point = j.at("shots_per_point").get<int>();
    d.shot_fraction = numbers(j, "shot_fraction");
  }
  try {
    d.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  if (path.extension() == ".json") return dataset_from_json(load_json(path));
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return dataset_from_csv(buf.str(), path.string());
}

json fit_to_json(const FitResult& fit) {
  json j;
  j["model"] = std::string(to_string(fit.kind));
  json params = json::object();
  json errors = json::object();
  const auto names = parameter_names(fit.kind);
  for (std::size_t i = 0; i < names.size(); ++i) {
    params[std::string(names[i])] = fit.params[i];
    // JSON has no infinity; an undetermined error is written as null.
    errors[std::string(names[i])] = std::isfinite(fit.std_errors[i]) ? json(fit.std_errors[i]) : json(nullptr);
  }
  j["params"] = params;
  j["stderr"] = errors;
  j["rss"] = fit.rss;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["gradient_norm"] = fit.gradient_norm;
  j["message"] = fit.message;
  return j;
}

std::string fit_to_csv(const FitResult& fit) {
  std::ostringstream out;
  out << "parameter,value,stderr\n";
  const auto names = parameter_names(fit.kind);
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ',' << format_double(fit.params[i]) << ',' << format_double(fit.std_errors[i]) << '\n';
  }
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qmem::app
