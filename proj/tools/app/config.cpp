#include "app/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "app/units.hpp"

namespace qmem::app {

using nlohmann::json;

namespace {

void check_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  check_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

double number_at(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

int integer_at(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

std::string string_at(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

Complex complex_from(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(where + ": expected a number or [re, im]");
}

HilbertDims parse_dims(const json& j, const std::string& where, HilbertDims dims) {
  check_keys(j, {"n_cav", "n_qubit"}, where);
  if (j.contains("n_cav")) dims.n_cav = integer_at(j, "n_cav", where);
  if (j.contains("n_qubit")) dims.n_qubit = integer_at(j, "n_qubit", where);
  try {
    dims.validate();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return dims;
}

ReadoutModel parse_readout(const json& j, const std::string& where) {
  check_keys(j, {"contrast", "baseline", "selective_photon", "shots", "seed"}, where);
  ReadoutModel ro;
  if (j.contains("contrast")) ro.contrast = number_at(j, "contrast", where);
  if (j.contains("baseline")) ro.baseline = number_at(j, "baseline", where);
  if (j.contains("selective_photon")) ro.selective_photon = integer_at(j, "selective_photon", where);
  if (j.contains("shots")) {
    const json& s = j.at("shots");
    if (s.is_null() || (s.is_string() && s.get<std::string>() == "none")) {
      ro.shots.reset();
    } else if (s.is_number_integer()) {
      ro.shots = s.get<int>();
    } else {
      throw ConfigError(where + ".shots: expected an integer or \"none\"");
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError(where + ".seed: expected a non-negative integer");
    ro.rng_seed = j.at("seed").get<std::uint64_t>();
  }
  try {
    ro.validate();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return ro;
}

IntegratorChoice parse_integrator(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  const auto s = v.get<std::string>();
  if (s == "auto") return IntegratorChoice::Auto;
  if (s == "adaptive") return IntegratorChoice::Adaptive;
  if (s == "exponential") return IntegratorChoice::Exponential;
  throw ConfigError(where + ": expected auto, adaptive or exponential, got '" + s + "'");
}

void parse_protocol_fields(const json& j, const std::string& where, ProtocolParams& p) {
  if (j.contains("points")) p.points = integer_at(j, "points", where);
  if (j.contains("span")) p.span = quantity_from_json(j.at("span"), Dimension::Time, where + ".span");
  if (j.contains("alpha")) p.alpha = complex_from(j.at("alpha"), where + ".alpha");
  if (j.contains("detuning")) {
    p.detuning = quantity_from_json(j.at("detuning"), Dimension::Frequency, where + ".detuning");
  }
  if (j.contains("readout_displacement")) p.readout_displacement = number_at(j, "readout_displacement", where);
  if (p.points < 2) throw ConfigError(where + ".points: a sweep needs at least two points");
  if (p.span && !(*p.span > 0.0)) throw ConfigError(where + ".span: must be > 0");
}

WignerState parse_wigner_state(const json& j, const std::string& where) {
  check_keys(j, {"kind", "n", "alpha"}, where);
  WignerState s;
  const std::string kind = string_at(j, "kind", where);
  if (kind == "fock") {
    s.kind = WignerState::Kind::Fock;
    s.n = j.contains("n") ? integer_at(j, "n", where) : 0;
    if (s.n < 0) throw ConfigError(where + ".n: must be >= 0");
  } else if (kind == "vacuum") {
    s.kind = WignerState::Kind::Fock;
  } else if (kind == "coherent") {
    s.kind = WignerState::Kind::Coherent;
    if (!j.contains("alpha")) throw ConfigError(where + ": coherent state needs 'alpha'");
    s.alpha = complex_from(j.at("alpha"), where + ".alpha");
  } else if (kind == "superposition") {
    s.kind = WignerState::Kind::Superposition;
  } else if (kind == "fock1_snap") {
    s.kind = WignerState::Kind::Fock1Snap;
  } else {
    throw ConfigError(where + ".kind: expected fock, vacuum, coherent, superposition or fock1_snap");
  }
  return s;
}

WignerGridSpec parse_grid(const json& j, const std::string& where) {
  check_keys(j, {"re_min", "re_max", "im_min", "im_max", "points", "n_re", "n_im"}, where);
  WignerGridSpec g;
  if (j.contains("re_min")) g.re_min = number_at(j, "re_min", where);
  if (j.contains("re_max")) g.re_max = number_at(j, "re_max", where);
  if (j.contains("im_min")) g.im_min = number_at(j, "im_min", where);
  if (j.contains("im_max")) g.im_max = number_at(j, "im_max", where);
  if (j.contains("points")) g.n_re = g.n_im = integer_at(j, "points", where);
  if (j.contains("n_re")) g.n_re = integer_at(j, "n_re", where);
  if (j.contains("n_im")) g.n_im = integer_at(j, "n_im", where);
  if (g.n_re < 1 || g.n_im < 1) throw ConfigError(where + ": grid needs at least one point per axis");
  return g;
}

}  // namespace

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const auto last_nl = text.rfind('\n', upto > 0 ? upto - 1 : 0);
    const std::size_t col = upto - (last_nl == std::string::npos || last_nl >= upto ? 0 : last_nl + 1) + 1;
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": syntax error: " + e.what());
  }
}

DeviceModel parse_device(const json& j, const std::string& where) {
  check_keys(j,
             {"chi_over_2pi", "chi_prime_over_2pi", "cavity_T1", "cavity_Tphi", "nbar_th", "transmon_T1",
              "transmon_Tphi", "transmon_Pe_th", "f_storage", "f_transmon", "f_readout"},
             where);
  DeviceModel m;
  auto freq = [&](const char* key, double& out) {
    if (j.contains(key)) out = quantity_from_json(j.at(key), Dimension::Frequency, where + "." + key);
  };
  auto time = [&](const char* key, double& out, bool inf_ok) {
    if (j.contains(key)) out = quantity_from_json(j.at(key), Dimension::Time, where + "." + key, inf_ok);
  };
  freq("chi_over_2pi", m.chi_over_2pi);
  freq("chi_prime_over_2pi", m.chi_prime_over_2pi);
  time("cavity_T1", m.cavity_T1, false);
  time("cavity_Tphi", m.cavity_Tphi, true);
  if (j.contains("nbar_th")) m.nbar_th = number_at(j, "nbar_th", where);
  time("transmon_T1", m.transmon_T1, false);
  time("transmon_Tphi", m.transmon_Tphi, true);
  if (j.contains("transmon_Pe_th")) m.transmon_Pe_th = number_at(j, "transmon_Pe_th", where);
  freq("f_storage", m.f_storage);
  freq("f_transmon", m.f_transmon);
  freq("f_readout", m.f_readout);
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return m;
}

ExperimentConfig parse_experiment(const json& j) {
  check_keys(j, {"device", "hilbert", "readout", "experiment", "output"}, "config");
  ExperimentConfig c;
  if (!j.contains("experiment")) throw ConfigError("config: missing 'experiment'");
  const json& e = j.at("experiment");
  check_keys(e,
             {"kind", "points", "span", "alpha", "detuning", "readout_displacement", "integrator", "state", "grid"},
             "experiment");
  c.kind = string_at(e, "kind", "experiment");
  static const std::vector<std::string> kinds{"t1_fock", "t1_coherent", "t2_ramsey", "wigner", "nbar"};
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
    throw ConfigError("experiment.kind: expected t1_fock, t1_coherent, t2_ramsey, wigner or nbar, got '" + c.kind +
                      "'");
  }
  c.output_stem = c.kind;
  if (c.kind == "wigner") c.dims.n_cav = 25;  // covers the default +-2.5 grid

  if (j.contains("device")) c.device = parse_device(j.at("device"), "device");
  if (j.contains("hilbert")) c.dims = parse_dims(j.at("hilbert"), "hilbert", c.dims);
  if (j.contains("readout")) c.readout = parse_readout(j.at("readout"), "readout");
  parse_protocol_fields(e, "experiment", c.protocol);
  if (e.contains("integrator")) c.integrator = parse_integrator(e.at("integrator"), "experiment.integrator");
  if (c.kind == "wigner") {
    if (!e.contains("state")) throw ConfigError("experiment: wigner needs a 'state'");
    c.wigner_state = parse_wigner_state(e.at("state"), "experiment.state");
    if (e.contains("grid")) c.wigner_grid = parse_grid(e.at("grid"), "experiment.grid");
  } else if (e.contains("state") || e.contains("grid")) {
    throw ConfigError("experiment: 'state' and 'grid' apply to wigner only");
  }
  if (j.contains("output")) {
    check_keys(j.at("output"), {"stem"}, "output");
    if (j.at("output").contains("stem")) c.output_stem = string_at(j.at("output"), "stem", "output");
    if (c.output_stem.empty() || c.output_stem.find('/') != std::string::npos) {
      throw ConfigError("output.stem: must be a plain file stem");
    }
  }
  return c;
}

PipelineConfig parse_pipeline(const json& j) {
  check_keys(j, {"devices", "hilbert", "readout", "experiment"}, "config");
  PipelineConfig c;
  if (!j.contains("devices") || !j.at("devices").is_array()) throw ConfigError("config: 'devices' must be a list");
  if (j.at("devices").empty()) throw ConfigError("config.devices: empty device list");
  if (j.contains("hilbert")) c.dims = parse_dims(j.at("hilbert"), "hilbert", c.dims);
  if (j.contains("readout")) c.readout = parse_readout(j.at("readout"), "readout");
  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    check_keys(e, {"points", "readout_displacement", "integrator"}, "experiment");
    parse_protocol_fields(e, "experiment", c.protocol);
    if (e.contains("integrator")) c.integrator = parse_integrator(e.at("integrator"), "experiment.integrator");
  }
  std::size_t i = 0;
  for (const json& d : j.at("devices")) {
    const std::string where = "devices[" + std::to_string(i++) + "]";
    check_keys(d, {"name", "device"}, where);
    PipelineDevice pd;
    pd.name = d.contains("name") ? string_at(d, "name", where) : where;
    pd.device = d.contains("device") ? parse_device(d.at("device"), where + ".device") : DeviceModel{};
    c.devices.push_back(std::move(pd));
  }
  return c;
}

std::vector<LossChannel> parse_budget(const json& j) {
  check_keys(j, {"name", "channels"}, "budget");
  if (!j.contains("channels") || !j.at("channels").is_array()) {
    throw ConfigError("budget: 'channels' must be a list");
  }
  if (j.at("channels").empty()) throw ConfigError("budget.channels: empty channel list");
  std::vector<LossChannel> out;
  std::size_t i = 0;
  for (const json& c : j.at("channels")) {
    const std::string where = "channels[" + std::to_string(i++) + "]";
    check_object(c, where);
    LossChannel ch;
    ch.name = string_at(c, "name", where);
    const std::string kind = c.contains("kind") ? string_at(c, "kind", where) : "participation";
    const char* weight_key = nullptr;
    const char* quality_key = nullptr;
    if (kind == "participation") {
      check_keys(c, {"name", "kind", "p", "q", "bound"}, where);
      ch.kind = ChannelKind::Participation;
      weight_key = "p";
      quality_key = "q";
    } else if (kind == "seam") {
      check_keys(c, {"name", "kind", "y_seam", "g_seam", "bound"}, where);
      ch.kind = ChannelKind::Seam;
      weight_key = "y_seam";
      quality_key = "g_seam";
    } else {
      throw ConfigError(where + ".kind: expected participation or seam, got '" + kind + "'");
    }
    if (!c.contains(weight_key)) throw ConfigError(where + ": missing '" + weight_key + "'");
    ch.weight = number_at(c, weight_key, where);
    if (c.contains(quality_key) && !c.at(quality_key).is_null()) ch.quality = number_at(c, quality_key, where);
    if (c.contains("bound")) {
      const std::string b = string_at(c, "bound", where);
      if (b == "exact") {
        ch.bound = BoundFlag::Exact;
      } else if (b == "lower") {
        ch.bound = BoundFlag::LowerBound;
      } else {
        throw ConfigError(where + ".bound: expected exact or lower, got '" + b + "'");
      }
    }
    try {
      ch.validate();
    } catch (const DomainError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    out.push_back(std::move(ch));
  }
  return out;
}

}  // namespace qmem::app
