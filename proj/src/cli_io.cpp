#include "qfall/cli_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "qfall/error.hpp"
#include "qfall/parallel.hpp"

namespace qfall::cli_io {

namespace fs = std::filesystem;
using experiments::Scenario;
using wavepacket::PacketShape;
using wavepacket::ShapeKind;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) config_error("missing key '" + key + "' in " + where);
  return obj.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) config_error(what + " must be a number");
  return v.get<double>();
}

long integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) config_error(what + " must be an integer");
  return v.get<long>();
}

bool boolean(const json& v, const std::string& what) {
  if (!v.is_boolean()) config_error(what + " must be true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const json& v, const std::string& what) {
  if (!v.is_array()) config_error(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(number(e, what));
  return out;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

PacketShape parse_shape(const json& shape_name, const json* params, int dim, const fs::path& base_dir,
                        const std::string& where) {
  if (!shape_name.is_string()) config_error(where + ".shape must be a string");
  PacketShape shape;
  shape.kind = wavepacket::shape_kind_from_string(shape_name.get<std::string>());
  const json empty = json::object();
  const json& p = params ? *params : empty;
  const std::string pw = where + ".params";
  switch (shape.kind) {
    case ShapeKind::gaussian: reject_unknown(p, {"sigma"}, pw); break;
    case ShapeKind::skewed_gaussian: reject_unknown(p, {"sigma", "skew"}, pw); break;
    case ShapeKind::double_peak: reject_unknown(p, {"sigma", "separation"}, pw); break;
    case ShapeKind::custom_table: reject_unknown(p, {"table"}, pw); break;
  }
  if (shape.kind == ShapeKind::custom_table) {
    const json& t = require(p, "table", pw);
    if (!t.is_string()) config_error(pw + ".table must be a path string");
    shape.table_source = t.get<std::string>();
    fs::path path = shape.table_source;
    if (path.is_relative()) path = base_dir / path;
    shape.table = wavepacket::read_table_csv(path, dim);
    return shape;
  }
  if (p.contains("sigma")) {
    const json& s = p.at("sigma");
    shape.sigma = s.is_array() ? numbers(s, pw + ".sigma") : std::vector<double>{number(s, pw + ".sigma")};
  }
  shape.skew = number_or(p, "skew", 0.0, pw);
  shape.separation = number_or(p, "separation", 0.0, pw);
  return shape;
}

json shape_json(const PacketShape& shape) {
  json params = json::object();
  if (shape.kind == ShapeKind::custom_table) {
    params["table"] = shape.table_source;
  } else {
    params["sigma"] = shape.sigma;
    if (shape.kind == ShapeKind::skewed_gaussian) params["skew"] = shape.skew;
    if (shape.kind == ShapeKind::double_peak) params["separation"] = shape.separation;
  }
  return {{"shape", std::string(wavepacket::to_string(shape.kind))}, {"params", params}};
}

std::string rate_name(curvature::RateModel r) {
  return r == curvature::RateModel::exact ? "exact" : "first_order";
}

curvature::RateModel rate_from_string(const std::string& s) {
  if (s == "first_order") return curvature::RateModel::first_order;
  if (s == "exact") return curvature::RateModel::exact;
  config_error("unknown rate model '" + s + "'");
}

// Re-checks every precondition that a run would otherwise trip over late.
void validate_scenario(const Scenario& s) {
  curvature::validate_tidal(s.tidal, s.grid.extent(), s.vacuum, s.evolve.validity_threshold);
  const auto report = curvature::validate_tidal(s.tidal, s.grid.extent(), false,
                                                s.evolve.validity_threshold);
  if (!report.ok) throw Error(ErrorCode::OutsideValidity, report.messages.front());
  if (s.evolve.n_steps < 1) config_error("evolve.steps must be positive");
  if (s.evolve.record_every < 1) config_error("evolve.record_every must be positive");
  if (!(s.evolve.boundary_margin_fraction > 0.0 && s.evolve.boundary_margin_fraction < 0.5)) {
    config_error("evolve.boundary_margin_fraction must lie in (0, 0.5)");
  }
  if (!(s.evolve.boundary_mass_tol > 0.0)) config_error("evolve.boundary_mass_tol must be positive");
  propagator::check_step(s.grid, s.mass, s.tidal, s.evolve.dt, s.evolve.validity_threshold);
  (void)s.initial_state();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_json(const fs::path& out, const json& doc) {
  std::ofstream os(out);
  if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + out.string());
  os << doc.dump(2) << '\n';
}

// Loads and validates; any failure maps to the validation exit code.
template <class Extra>
std::optional<ScenarioConfig> load_validated(const fs::path& config, std::ostream& log, Extra&& extra) {
  try {
    ScenarioConfig cfg = load_config(config);
    extra(cfg);
    return cfg;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return std::nullopt;
  }
}

}  // namespace

ScenarioConfig parse_config(const json& doc, const fs::path& base_dir) {
  reject_unknown(doc, {"grid", "packet", "curvature", "evolve", "experiment"}, "config");
  ScenarioConfig cfg;
  Scenario& s = cfg.scenario;

  const json& g = require(doc, "grid", "config");
  reject_unknown(g, {"dim", "n", "extent"}, "grid");
  const int dim = static_cast<int>(integer(require(g, "dim", "grid"), "grid.dim"));
  s.grid = SpectralGrid(dim, static_cast<int>(integer(require(g, "n", "grid"), "grid.n")),
                        number(require(g, "extent", "grid"), "grid.extent"));

  const json& p = require(doc, "packet", "config");
  reject_unknown(p, {"shape", "params", "x0", "v0", "mass"}, "packet");
  s.shape = parse_shape(require(p, "shape", "packet"), p.contains("params") ? &p.at("params") : nullptr,
                        dim, base_dir, "packet");
  s.x0 = numbers(require(p, "x0", "packet"), "packet.x0");
  s.v0 = p.contains("v0") ? numbers(p.at("v0"), "packet.v0") : Vec(dim, 0.0);
  s.mass = number(require(p, "mass", "packet"), "packet.mass");

  const json& c = require(doc, "curvature", "config");
  reject_unknown(c, {"tidal", "vacuum", "validity_threshold"}, "curvature");
  s.tidal = curvature::TidalMatrix(dim, numbers(require(c, "tidal", "curvature"), "curvature.tidal"));
  s.vacuum = c.contains("vacuum") ? boolean(c.at("vacuum"), "curvature.vacuum") : false;
  s.evolve.validity_threshold =
      number_or(c, "validity_threshold", curvature::kDefaultValidityThreshold, "curvature");

  const json& e = require(doc, "evolve", "config");
  reject_unknown(e, {"dt", "steps", "record_every", "scheme", "boundary_margin_fraction",
                     "boundary_mass_tol", "rate"},
                 "evolve");
  s.evolve.dt = number(require(e, "dt", "evolve"), "evolve.dt");
  s.evolve.n_steps = integer(require(e, "steps", "evolve"), "evolve.steps");
  s.evolve.record_every = e.contains("record_every") ? integer(e.at("record_every"), "evolve.record_every") : 1;
  if (e.contains("scheme")) {
    if (!e.at("scheme").is_string()) config_error("evolve.scheme must be a string");
    s.evolve.scheme = propagator::scheme_from_string(e.at("scheme").get<std::string>());
  }
  s.evolve.boundary_margin_fraction = number_or(e, "boundary_margin_fraction", 0.1, "evolve");
  s.evolve.boundary_mass_tol = number_or(e, "boundary_mass_tol", 1e-8, "evolve");
  if (e.contains("rate")) {
    if (!e.at("rate").is_string()) config_error("evolve.rate must be a string");
    s.evolve.rate = rate_from_string(e.at("rate").get<std::string>());
  }

  if (doc.contains("experiment")) {
    const json& x = doc.at("experiment");
    reject_unknown(x, {"masses", "shapes", "dt_list", "order_band", "wep_tolerance"}, "experiment");
    if (x.contains("masses")) cfg.experiment.masses = numbers(x.at("masses"), "experiment.masses");
    if (x.contains("shapes")) {
      if (!x.at("shapes").is_array()) config_error("experiment.shapes must be an array");
      int i = 0;
      for (const auto& entry : x.at("shapes")) {
        const std::string where = "experiment.shapes[" + std::to_string(i++) + "]";
        reject_unknown(entry, {"shape", "params"}, where);
        cfg.experiment.shapes.push_back(parse_shape(require(entry, "shape", where),
                                                    entry.contains("params") ? &entry.at("params") : nullptr,
                                                    dim, base_dir, where));
      }
    }
    if (x.contains("dt_list")) cfg.experiment.dt_list = numbers(x.at("dt_list"), "experiment.dt_list");
    if (x.contains("order_band")) {
      const auto band = numbers(x.at("order_band"), "experiment.order_band");
      if (band.size() != 2 || !(band[0] <= band[1])) config_error("experiment.order_band must be [lo, hi]");
      cfg.experiment.order_band = std::array<double, 2>{band[0], band[1]};
    }
    cfg.experiment.wep_tolerance =
        number_or(x, "wep_tolerance", experiments::kDefaultWepTolerance, "experiment");
  }

  validate_scenario(s);
  for (double m : cfg.experiment.masses) {
    Scenario variant = s;
    variant.mass = m;
    validate_scenario(variant);
  }
  for (const auto& shape : cfg.experiment.shapes) {
    Scenario variant = s;
    variant.shape = shape;
    validate_scenario(variant);
  }
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json resolved_json(const ScenarioConfig& cfg) {
  const Scenario& s = cfg.scenario;
  json doc;
  doc["grid"] = {{"dim", s.grid.dim()}, {"n", s.grid.points_per_axis()}, {"extent", s.grid.extent()}};
  json packet = shape_json(s.shape);
  packet["x0"] = s.x0;
  packet["v0"] = s.v0;
  packet["mass"] = s.mass;
  doc["packet"] = packet;
  doc["curvature"] = {{"tidal", std::vector<double>(s.tidal.entries().begin(), s.tidal.entries().end())},
                      {"vacuum", s.vacuum},
                      {"validity_threshold", s.evolve.validity_threshold}};
  doc["evolve"] = {{"dt", s.evolve.dt},
                   {"steps", s.evolve.n_steps},
                   {"record_every", s.evolve.record_every},
                   {"scheme", std::string(propagator::to_string(s.evolve.scheme))},
                   {"boundary_margin_fraction", s.evolve.boundary_margin_fraction},
                   {"boundary_mass_tol", s.evolve.boundary_mass_tol},
                   {"rate", rate_name(s.evolve.rate)}};
  json x = json::object();
  if (!cfg.experiment.masses.empty()) x["masses"] = cfg.experiment.masses;
  if (!cfg.experiment.shapes.empty()) {
    x["shapes"] = json::array();
    for (const auto& sh : cfg.experiment.shapes) x["shapes"].push_back(shape_json(sh));
  }
  if (!cfg.experiment.dt_list.empty()) x["dt_list"] = cfg.experiment.dt_list;
  if (cfg.experiment.order_band) x["order_band"] = *cfg.experiment.order_band;
  x["wep_tolerance"] = cfg.experiment.wep_tolerance;
  doc["experiment"] = x;
  return doc;
}

json to_json(const experiments::WepReport& rep) {
  return {{"varied", rep.varied},         {"labels", rep.labels},
          {"deviation", rep.deviation},   {"eotvos", rep.eotvos},
          {"amplitude", rep.amplitude},   {"threshold", rep.threshold},
          {"max_deviation", rep.max_deviation}, {"max_eotvos", rep.max_eotvos},
          {"pass", rep.pass}};
}

json to_json(const experiments::RippleReport& rep) {
  return {{"predicted_dk", rep.predicted},
          {"measured_dk", rep.measured},
          {"relative_error", rep.relative_error},
          {"edge_phase", rep.edge_phase}};
}

json to_json(const experiments::ConvergenceReport& rep) {
  return {{"scheme", std::string(propagator::to_string(rep.scheme))},
          {"dt", rep.dts},
          {"error", rep.errors},
          {"reference_dt", rep.reference_dt},
          {"order", rep.order},
          {"band", rep.band},
          {"pass", rep.pass}};
}

std::string csv_header(int dim) {
  std::ostringstream os;
  os << "t,norm";
  for (int a = 1; a <= dim; ++a) os << ",mx" << a;
  for (int a = 1; a <= dim; ++a) os << ",mv" << a;
  for (int a = 1; a <= dim; ++a) {
    for (int b = 1; b <= dim; ++b) os << ",cov" << a << b;
  }
  for (int a = 1; a <= dim; ++a) os << ",clx" << a;
  os << ",dev";
  return os.str();
}

int cmd_run(const fs::path& config, const fs::path& out, std::ostream& log) {
  const auto cfg = load_validated(config, log, [](const ScenarioConfig&) {});
  if (!cfg) return kExitValidation;

  std::ofstream csv(out);
  if (!csv) {
    log << "error: cannot write " << out << '\n';
    return kExitValidation;
  }
  csv << "# config: " << resolved_json(*cfg).dump() << '\n' << csv_header(cfg->scenario.grid.dim()) << '\n';

  auto row = [&](const propagator::MomentRecord& r, const Vec& cl) {
    csv << fmt(r.t) << ',' << fmt(r.norm);
    for (double v : r.mean_x) csv << ',' << fmt(v);
    for (double v : r.mean_v) csv << ',' << fmt(v);
    for (double v : r.cov) csv << ',' << fmt(v);
    for (double v : cl) csv << ',' << fmt(v);
    csv << ',' << fmt(euclidean_norm(difference(r.mean_x, cl))) << '\n';
  };
  try {
    const auto result = experiments::run_scenario(cfg->scenario, row);
    log << "run: " << result.quantum.records.size() << " records, max deviation " << result.match << '\n';
  } catch (const std::exception& e) {
    csv << "# aborted: " << e.what() << '\n';
    csv.flush();
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_wep(const fs::path& config, const fs::path& out, std::ostream& log) {
  const auto cfg = load_validated(config, log, [](const ScenarioConfig& c) {
    const auto& x = c.experiment;
    if (x.masses.empty() && x.shapes.empty()) {
      throw Error(ErrorCode::TooFewVariants, "experiment needs masses[] or shapes[]");
    }
    if (!x.masses.empty() && x.masses.size() < 2) {
      throw Error(ErrorCode::TooFewVariants, "mass sweep needs at least 2 masses");
    }
    if (!x.shapes.empty() && x.shapes.size() < 2) {
      throw Error(ErrorCode::TooFewVariants, "shape sweep needs at least 2 shapes");
    }
  });
  if (!cfg) return kExitValidation;

  json doc;
  doc["config"] = resolved_json(*cfg);
  doc["reports"] = json::array();
  bool pass = true;
  try {
    const auto& x = cfg->experiment;
    if (!x.masses.empty()) {
      const auto rep = experiments::wep_mass_sweep(cfg->scenario, x.masses, x.wep_tolerance);
      doc["reports"].push_back(to_json(rep));
      pass = pass && rep.pass;
      log << "wep mass sweep: max deviation " << rep.max_deviation << ", max eotvos " << rep.max_eotvos << '\n';
    }
    if (!x.shapes.empty()) {
      const auto rep = experiments::wep_shape_sweep(cfg->scenario, x.shapes, x.wep_tolerance);
      doc["reports"].push_back(to_json(rep));
      pass = pass && rep.pass;
      log << "wep shape sweep: max deviation " << rep.max_deviation << ", max eotvos " << rep.max_eotvos << '\n';
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    const bool validation = e.code() == ErrorCode::InitialMomentMismatch;
    doc["aborted"] = e.what();
    write_json(out, doc);
    return validation ? kExitValidation : kExitRuntime;
  }
  doc["pass"] = pass;
  write_json(out, doc);
  return pass ? kExitOk : kExitFailed;
}

int cmd_ripple(const fs::path& config, const fs::path& out, std::ostream& log) {
  constexpr double kRippleTolerance = 1e-8;
  const auto cfg = load_validated(config, log, [](const ScenarioConfig& c) {
    const auto& s = c.scenario;
    const double edge = experiments::tidal_edge_phase(s.grid, s.tidal, s.mass, s.evolve.dt);
    if (edge >= kPi / 4.0) {
      std::ostringstream os;
      os << "tidal phase at the domain edge is " << edge << " >= pi/4";
      throw Error(ErrorCode::PhaseWrapRisk, os.str());
    }
  });
  if (!cfg) return kExitValidation;
  try {
    const auto& s = cfg->scenario;
    const auto rep = experiments::ripple_check(s.initial_state(), s.tidal, s.evolve.dt);
    const bool pass = rep.relative_error < kRippleTolerance;
    json doc;
    doc["config"] = resolved_json(*cfg);
    doc["report"] = to_json(rep);
    doc["tolerance"] = kRippleTolerance;
    doc["pass"] = pass;
    write_json(out, doc);
    log << "ripple: relative error " << rep.relative_error << '\n';
    return pass ? kExitOk : kExitFailed;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_converge(const fs::path& config, const fs::path& out, std::ostream& log) {
  const auto cfg = load_validated(config, log, [](const ScenarioConfig& c) {
    const auto& dts = c.experiment.dt_list;
    if (dts.size() < 3) throw Error(ErrorCode::TooFewPoints, "dt_list needs at least 3 values");
    for (double dt : dts) {
      propagator::check_step(c.scenario.grid, c.scenario.mass, c.scenario.tidal, dt,
                             c.scenario.evolve.validity_threshold);
    }
  });
  if (!cfg) return kExitValidation;
  try {
    auto rep = experiments::convergence_study(cfg->scenario, cfg->experiment.dt_list,
                                              cfg->scenario.evolve.scheme);
    if (cfg->experiment.order_band) {
      rep.band = *cfg->experiment.order_band;
      rep.pass = rep.order >= rep.band[0] && rep.order <= rep.band[1];
    }
    json doc = to_json(rep);
    doc["config"] = resolved_json(*cfg);
    write_json(out, doc);
    log << "converge: fitted order " << rep.order << " (band " << rep.band[0] << ".." << rep.band[1] << ")\n";
    return rep.pass ? kExitOk : kExitFailed;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int main_entry(int argc, char** argv) {
  parallel::configure_from_environment();

  CLI::App app{"Quantum wave packets in a weakly curved Fermi-normal frame"};
  app.require_subcommand(1);
  fs::path config;
  fs::path out;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output path")->required();
    return sub;
  };
  auto* run = add("run", "evolve one scenario, write a CSV moment series");
  auto* wep = add("wep", "mass / shape sweeps, write a JSON report");
  auto* ripple = add("ripple", "single-step wave-vector kick check, write a JSON report");
  auto* converge = add("converge", "splitting-order study, write a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (run->parsed()) return cmd_run(config, out, std::cerr);
  if (wep->parsed()) return cmd_wep(config, out, std::cerr);
  if (ripple->parsed()) return cmd_ripple(config, out, std::cerr);
  if (converge->parsed()) return cmd_converge(config, out, std::cerr);
  return kExitValidation;
}

}  // namespace qfall::cli_io
