#include "app/commands.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "app/config.hpp"
#include "app/svg.hpp"
#include "app/units.hpp"
#include "qmem/sequence.hpp"

namespace qmem::app {

using nlohmann::json;

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "file error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IntegrationError& e) {
    err << "simulation failed at t = " << format_double(e.time_reached()) << " s: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const FitError& e) {
    err << "fit failed: " << e.what() << '\n';
    return kExitFit;
  } catch (const std::exception& e) {
    err << "simulation failed: " << e.what() << '\n';
    return kExitSimulation;
  }
}

std::string extension(OutputFormat f) { return f == OutputFormat::Json ? ".json" : ".csv"; }

void apply_overrides(const CommonOptions& opts, ReadoutModel& ro) {
  if (opts.seed) ro.rng_seed = *opts.seed;
  if (opts.shots) ro.shots = *opts.shots;
  ro.validate();
}

RunOptions run_options(IntegratorChoice choice) {
  RunOptions r;
  r.auto_method = choice == IntegratorChoice::Auto;
  if (choice == IntegratorChoice::Exponential) r.evolve.method = EvolveMethod::Exponential;
  return r;
}

QuantumState wigner_state(const WignerState& s, const HilbertDims& dims) {
  switch (s.kind) {
    case WignerState::Kind::Fock:
      return fock_state(s.n, dims);
    case WignerState::Kind::Coherent:
      return coherent_state(s.alpha, dims);
    case WignerState::Kind::Superposition:
    case WignerState::Kind::Fock1Snap: {
      QuantumState st = fock_state(0, dims);
      const auto steps = s.kind == WignerState::Kind::Superposition ? snap_prepare_superposition(dims)
                                                                    : snap_prepare_fock1(dims);
      for (const auto& g : steps) st = apply_gate(st, g, dims);
      return st;
    }
  }
  return fock_state(0, dims);
}

std::string bound_symbol(BoundFlag b) { return b == BoundFlag::LowerBound ? "≥ " : ""; }

std::string pad(std::string s, std::size_t width) {
  // Width counts code points so the multi-byte "≥" lines up.
  std::size_t cps = 0;
  for (const unsigned char c : s) cps += (c & 0xC0) != 0x80;
  if (cps < width) s.append(width - cps, ' ');
  return s;
}

int run_wigner(const ExperimentConfig& cfg, const CommonOptions& opts, std::ostream& out) {
  const QuantumState state = wigner_state(cfg.wigner_state, cfg.dims);
  const WignerGrid grid = wigner(state, cfg.wigner_grid);
  std::string body;
  if (opts.format == OutputFormat::Json) {
    json j;
    j["re"] = grid.re;
    j["im"] = grid.im;
    json rows = json::array();
    for (int i = 0; i < grid.spec.n_re; ++i) {
      std::vector<double> row(grid.spec.n_im);
      for (int k = 0; k < grid.spec.n_im; ++k) row[k] = grid.values(i, k);
      rows.push_back(row);
    }
    j["w"] = rows;
    body = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    os << "re,im,w\n";
    for (int i = 0; i < grid.spec.n_re; ++i) {
      for (int k = 0; k < grid.spec.n_im; ++k) {
        os << format_double(grid.re[i]) << ',' << format_double(grid.im[k]) << ',' << format_double(grid.values(i, k))
           << '\n';
      }
    }
    body = os.str();
  }
  const auto data_path = opts.out_dir / (cfg.output_stem + extension(opts.format));
  const auto plot_path = opts.out_dir / (cfg.output_stem + ".svg");
  write_file(data_path, body);
  write_file(plot_path, wigner_svg(grid, "Wigner function (" + cfg.output_stem + ")"));
  out << "wrote " << data_path.string() << " and " << plot_path.string() << " (integral "
      << format_double(grid.integral()) << ")\n";
  return kExitOk;
}

struct PipelineRow {
  std::string name;
  std::optional<FitResult> t1f, t1c, t2;
  std::optional<double> nbar;
  std::vector<std::string> errors;
  int first_failure = kExitOk;
};

json fit_cell(const std::optional<FitResult>& f) {
  if (!f) return nullptr;
  const int k = time_constant_index(f->kind);
  json c;
  c["value"] = f->params[k];
  c["stderr"] = std::isfinite(f->std_errors[k]) ? json(f->std_errors[k]) : json(nullptr);
  return c;
}

std::string ms_cell(const std::optional<FitResult>& f) {
  if (!f) return "-";
  const int k = time_constant_index(f->kind);
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << f->params[k] * 1e3 << " +- " << std::setprecision(3)
     << f->std_errors[k] * 1e3;
  return os.str();
}

}  // namespace

std::string format_sig(double x, int digits) {
  if (!std::isfinite(x)) return format_double(x);
  if (x == 0.0) return "0";
  const double r = round_sig(x, digits);
  const int e = static_cast<int>(std::floor(std::log10(std::abs(r)) + 1e-12));
  const double m = r / std::pow(10.0, e);
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits - 1) << m << 'e' << e;
  return os.str();
}

int cmd_budget(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const json doc = load_json(opts.config);
    const auto channels = parse_budget(doc);
    const LossBudget b = compute_budget(channels, 1);
    const DominantChannel dom = dominant_channel(b);
    const DominantChannel dom_shown = dominant_channel(b, true);

    json report;
    if (doc.contains("name")) report["name"] = doc.at("name");
    json rows = json::array();
    std::ostringstream csv;
    csv << "name,kind,weight,quality,bound,q_limit,q_limit_rounded,share\n";
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const auto& ch = channels[i];
      json r;
      r["name"] = ch.name;
      r["kind"] = std::string(to_string(ch.kind));
      r[ch.kind == ChannelKind::Participation ? "p" : "y_seam"] = ch.weight;
      r[ch.kind == ChannelKind::Participation ? "q" : "g_seam"] = ch.quality ? json(*ch.quality) : json(nullptr);
      r["bound"] = std::string(to_string(ch.bound));
      const auto& q = b.per_channel[i];
      r["q_limit"] = q ? json(q->value) : json(nullptr);
      r["q_limit_rounded"] = q ? json(round_sig(q->value, 1)) : json(nullptr);
      r["share"] = b.shares[i];
      rows.push_back(r);
      csv << csv_field(ch.name) << ',' << to_string(ch.kind) << ',' << format_double(ch.weight) << ','
          << (ch.quality ? format_double(*ch.quality) : "") << ',' << to_string(ch.bound) << ','
          << (q ? format_double(q->value) : "") << ',' << (q ? format_double(round_sig(q->value, 1)) : "") << ','
          << format_double(b.shares[i]) << '\n';
    }
    auto total_json = [](const QLimit& q) {
      json t;
      t["value"] = q.value;
      t["rounded"] = round_sig(q.value, 1);
      t["bound"] = std::string(to_string(q.bound));
      t["symbol"] = q.bound == BoundFlag::LowerBound ? "≥" : "=";
      return t;
    };
    report["channels"] = rows;
    report["total"] = total_json(b.total);
    report["displayed_precision_total"] = total_json(b.displayed_total);
    report["optimistic_total"] = std::isfinite(b.optimistic_total) ? json(b.optimistic_total) : json(nullptr);
    report["dominant"] = {{"names", dom.names}, {"share", dom.share}, {"share_displayed_precision", dom_shown.share}};
    csv << "total,,,,"
        << to_string(b.total.bound) << ',' << format_double(b.total.value) << ','
        << format_double(round_sig(b.total.value, 1)) << ",1\n";
    csv << "displayed_precision_total,,,," << to_string(b.displayed_total.bound) << ','
        << format_double(b.displayed_total.value) << ',' << format_double(round_sig(b.displayed_total.value, 1))
        << ",1\n";

    // Human-readable table.
    out << pad("Loss channel", 30) << pad("p or y", 10) << pad("q or g", 12) << pad("Q limit", 14) << "shown\n";
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const auto& ch = channels[i];
      const auto& q = b.per_channel[i];
      const std::string mark = ch.bound == BoundFlag::LowerBound ? ">" : "";
      out << pad(ch.name, 30) << pad(format_sig(ch.weight, 2), 10)
          << pad(ch.quality ? mark + format_sig(*ch.quality, 2) : "unassigned", 12)
          << pad(q ? mark + format_sig(q->value, 3) : "-", 14) << (q ? mark + format_sig(q->value, 1) : "-") << '\n';
    }
    out << pad("Total", 52) << pad(bound_symbol(b.total.bound) + format_sig(b.total.value, 3), 14)
        << bound_symbol(b.total.bound) << format_sig(b.total.value, 1) << '\n';
    out << pad("Total from displayed limits", 52)
        << pad(bound_symbol(b.displayed_total.bound) + format_sig(b.displayed_total.value, 3), 14)
        << bound_symbol(b.displayed_total.bound) << format_sig(b.displayed_total.value, 1) << '\n';
    if (b.total.bound == BoundFlag::LowerBound) {
      out << pad("Optimistic total (bounded channels lossless)", 52) << format_sig(b.optimistic_total, 3) << '\n';
    }
    out << "Dominant:";
    for (const auto& n : dom.names) out << ' ' << n;
    out << " (" << std::fixed << std::setprecision(1) << 100.0 * dom.share << "% of loss; "
        << 100.0 * dom_shown.share << "% from displayed limits)\n";
    out.unsetf(std::ios::floatfield);

    const auto path = opts.out_dir / ("budget" + extension(opts.format));
    write_file(path, opts.format == OutputFormat::Json ? report.dump(2) + "\n" : csv.str());
    out << "wrote " << path.string() << '\n';
    return kExitOk;
  });
}

int cmd_simulate(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    ExperimentConfig cfg = parse_experiment(load_json(opts.config));
    apply_overrides(opts, cfg.readout);
    if (cfg.kind == "wigner") return run_wigner(cfg, opts, out);

    if (cfg.kind == "nbar") {
      NbarOptions no;
      if (cfg.integrator == IntegratorChoice::Exponential) no.evolve.method = EvolveMethod::Exponential;
      const NbarEstimate est = nbar_estimate_detail(cfg.device, cfg.dims, cfg.readout, no);
      json j;
      j["nbar"] = est.nbar;
      j["p0"] = est.p0;
      j["settle_time"] = est.settle_time;
      j["residual"] = est.residual;
      j["estimator"] = "vacuum population at steady state, nbar = -ln P0";
      std::ostringstream csv;
      csv << "key,value\nnbar," << format_double(est.nbar) << "\np0," << format_double(est.p0) << "\nsettle_time,"
          << format_double(est.settle_time) << "\nresidual," << format_double(est.residual) << '\n';
      const auto path = opts.out_dir / (cfg.output_stem + extension(opts.format));
      write_file(path, opts.format == OutputFormat::Json ? j.dump(2) + "\n" : csv.str());
      out << "nbar = " << format_double(est.nbar) << "; wrote " << path.string() << '\n';
      return kExitOk;
    }

    const ProtocolKind kind = parse_protocol(cfg.kind);
    const PulseSequence seq = build_protocol(kind, cfg.device, cfg.dims, cfg.protocol);
    const Dataset ds = run_sequence(seq, cfg.device, cfg.dims, cfg.readout, run_options(cfg.integrator));
    const auto path = opts.out_dir / (cfg.output_stem + extension(opts.format));
    const auto plot = opts.out_dir / (cfg.output_stem + ".svg");
    write_file(path, opts.format == OutputFormat::Json ? dataset_to_json(ds).dump(2) + "\n" : dataset_to_csv(ds));
    write_file(plot, trace_svg(ds, std::nullopt, cfg.kind));
    out << "wrote " << path.string() << " (" << ds.sweep_values.size() << " points) and " << plot.string() << '\n';
    return kExitOk;
  });
}

int cmd_fit(const CommonOptions& opts, const std::filesystem::path& dataset, const std::string& model,
            std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const FitModelKind kind = parse_fit_model(model);
    const Dataset ds = load_dataset(dataset);
    const FitResult f = fit(kind, ds);
    const std::string stem = "fit_" + std::string(to_string(kind));
    const auto path = opts.out_dir / (stem + extension(opts.format));
    write_file(path, opts.format == OutputFormat::Json ? fit_to_json(f).dump(2) + "\n" : fit_to_csv(f));
    write_file(opts.out_dir / (stem + ".svg"), trace_svg(ds, f, std::string(to_string(kind))));
    const auto names = parameter_names(kind);
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << names[i] << " = " << format_double(f.params[i]) << " +- " << format_double(f.std_errors[i]) << '\n';
    }
    if (!f.converged) {
      err << "fit did not converge after " << f.iterations << " iterations: " << f.message << " (gradient "
          << format_double(f.gradient_norm) << ", rss " << format_double(f.rss) << ")\n";
      return kExitFit;
    }
    out << "wrote " << path.string() << '\n';
    return kExitOk;
  });
}

int cmd_wigner(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const ExperimentConfig cfg = parse_experiment(load_json(opts.config));
    if (cfg.kind != "wigner") throw ConfigError("experiment.kind: the wigner command needs kind 'wigner'");
    return run_wigner(cfg, opts, out);
  });
}

int cmd_pipeline(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    PipelineConfig cfg = parse_pipeline(load_json(opts.config));
    apply_overrides(opts, cfg.readout);

    std::vector<PipelineRow> rows;
    for (std::size_t d = 0; d < cfg.devices.size(); ++d) {
      const auto& dev = cfg.devices[d];
      PipelineRow row;
      row.name = dev.name;
      const std::array<ProtocolKind, 3> kinds{ProtocolKind::T1Fock, ProtocolKind::T1Coherent, ProtocolKind::T2Ramsey};
      for (std::size_t p = 0; p < kinds.size(); ++p) {
        auto& slot = p == 0 ? row.t1f : (p == 1 ? row.t1c : row.t2);
        const int code = guarded(err, [&]() -> int {
          ReadoutModel ro = cfg.readout;
          // Distinct sampling streams per device and protocol.
          ro.rng_seed = cfg.readout.rng_seed + 16 * d + p;
          const auto seq = build_protocol(kinds[p], dev.device, cfg.dims, cfg.protocol);
          const Dataset ds = run_sequence(seq, dev.device, cfg.dims, ro, run_options(cfg.integrator));
          FitResult f = fit(fit_model_for(kinds[p]), ds);
          if (!f.converged) throw FitError("fit did not converge: " + f.message);
          slot = std::move(f);
          return kExitOk;
        });
        if (code != kExitOk) {
          row.errors.push_back(std::string(to_string(kinds[p])) + " failed (exit " + std::to_string(code) + ")");
          if (row.first_failure == kExitOk) row.first_failure = code;
        }
      }
      const int code = guarded(err, [&]() -> int {
        NbarOptions no;
        row.nbar = nbar_estimate(dev.device, cfg.dims, cfg.readout, no);
        return kExitOk;
      });
      if (code != kExitOk) {
        row.errors.push_back("nbar failed (exit " + std::to_string(code) + ")");
        if (row.first_failure == kExitOk) row.first_failure = code;
      }
      rows.push_back(std::move(row));
    }

    json report;
    json jrows = json::array();
    std::ostringstream csv;
    csv << "device,T1F_s,T1F_stderr_s,T1C_s,T1C_stderr_s,T2_s,T2_stderr_s,nbar,status\n";
    auto csv_fit = [](const std::optional<FitResult>& f) {
      if (!f) return std::string(",");
      const int k = time_constant_index(f->kind);
      return format_double(f->params[k]) + "," + format_double(f->std_errors[k]);
    };
    out << pad("device", 22) << pad("T1F (ms)", 20) << pad("T1C (ms)", 20) << pad("T2 (ms)", 20) << "nbar\n";
    int succeeded = 0;
    int first_failure = kExitOk;
    for (const auto& r : rows) {
      const bool ok = r.errors.empty();
      succeeded += ok;
      if (!ok && first_failure == kExitOk) first_failure = r.first_failure;
      json jr;
      jr["device"] = r.name;
      jr["T1F"] = fit_cell(r.t1f);
      jr["T1C"] = fit_cell(r.t1c);
      jr["T2"] = fit_cell(r.t2);
      jr["nbar"] = r.nbar ? json(*r.nbar) : json(nullptr);
      jr["status"] = ok ? "ok" : "failed";
      jr["errors"] = r.errors;
      jrows.push_back(jr);
      csv << csv_field(r.name) << ',' << csv_fit(r.t1f) << ',' << csv_fit(r.t1c) << ',' << csv_fit(r.t2) << ','
          << (r.nbar ? format_double(*r.nbar) : "") << ',' << (ok ? "ok" : "failed") << '\n';
      std::ostringstream nb;
      if (r.nbar) nb << std::fixed << std::setprecision(3) << *r.nbar;
      out << pad(r.name, 22) << pad(ms_cell(r.t1f), 20) << pad(ms_cell(r.t1c), 20) << pad(ms_cell(r.t2), 20)
          << (r.nbar ? nb.str() : "-") << '\n';
    }
    report["rows"] = jrows;
    report["nbar_estimator"] = "vacuum population at steady state, nbar = -ln P0";
    const auto path = opts.out_dir / ("pipeline" + extension(opts.format));
    write_file(path, opts.format == OutputFormat::Json ? report.dump(2) + "\n" : csv.str());
    out << "wrote " << path.string() << '\n';
    return succeeded > 0 ? kExitOk : first_failure;
  });
}

}  // namespace qmem::app
