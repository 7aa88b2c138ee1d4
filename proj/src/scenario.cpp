#include "harvest/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "harvest/errors.hpp"

namespace harvest {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void fail(Errc code, const std::string& key, const std::string& what) {
  throw Error(code, key + ": " + what);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    fail(Errc::config, key, "expected a number, got '" + raw + "'");
  return v;
}

long long to_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    fail(Errc::config, key, "expected an integer, got '" + raw + "'");
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& t) : t_(t) {}
  bool has(const std::string& key) const { return t_.get_optional<std::string>(key).has_value(); }
  std::string str(const std::string& key) const {
    auto v = t_.get_optional<std::string>(key);
    if (!v) fail(Errc::config, key, "missing required key");
    return trim(*v);
  }
  std::string str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }
  double num(const std::string& key) const { return to_double(key, str(key)); }
  double num(const std::string& key, double def) const { return has(key) ? num(key) : def; }
  long long integer(const std::string& key) const { return to_int(key, str(key)); }
  long long integer(const std::string& key, long long def) const { return has(key) ? integer(key) : def; }
  std::vector<double> list(const std::string& key, size_t n) const {
    auto v = to_list(key, str(key));
    if (v.size() != n) fail(Errc::config, key, "expected " + std::to_string(n) + " comma-separated numbers");
    return v;
  }
  BumpParams bump(const std::string& key) const {
    const auto v = list(key, 5);
    return {v[0], v[1], v[2], v[3], v[4]};
  }

 private:
  const pt::ptree& t_;
};

OperatorConfig read_operator(const Reader& r, const std::string& sec) {
  OperatorConfig c;
  c.mass = r.num(sec + ".mass", 1.0);
  if (c.mass < 0.0) fail(Errc::config, sec + ".mass", "mass must be non-negative");
  if (r.has(sec + ".potential")) {
    const auto v = r.list(sec + ".potential", 3);
    c.well_depth = v[0];
    c.well_center = v[1];
    c.well_width = v[2];
  }
  return c;
}

StateConfig read_state(const Reader& r, const std::string& name) {
  StateConfig s;
  s.kind = r.str("states." + name, "vacuum");
  if (s.kind != "vacuum" && s.kind != "thermal")
    fail(Errc::config, "states." + name, "state must be 'vacuum' or 'thermal'");
  s.temperature = r.num("states." + name + "_temperature", 0.0);
  if (s.kind == "thermal" && !(s.temperature > 0.0))
    fail(Errc::config, "states." + name + "_temperature", "thermal state needs a positive temperature");
  return s;
}

ModeConfig read_mode(const Reader& r, const std::string& p) {
  ModeConfig m;
  m.kind = r.str("modes." + p + "_kind", "carrier");
  m.envelope = r.bump("modes." + p + "_envelope");
  if (m.kind == "carrier") {
    m.omega = r.num("modes." + p + "_omega", 1.0);
  } else if (m.kind == "pair") {
    m.second = r.bump("modes." + p + "_second");
  } else {
    fail(Errc::config, "modes." + p + "_kind", "mode kind must be 'carrier' or 'pair'");
  }
  return m;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const BumpParams& b) {
  return fmt(b.t) + ", " + fmt(b.x) + ", " + fmt(b.rt) + ", " + fmt(b.rx) + ", " + fmt(b.amplitude);
}

}  // namespace

ScenarioConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::config, std::string("scenario file: ") + e.message() + " (line " +
                                  std::to_string(e.line()) + ")");
  }
  const Reader r(tree);
  ScenarioConfig c;
  const LatticeSpec def;
  c.lattice.n_space = static_cast<int>(r.integer("lattice.n_space", def.n_space));
  c.lattice.n_time = static_cast<int>(r.integer("lattice.n_time", def.n_time));
  c.lattice.dx = r.num("lattice.dx", def.dx);
  c.lattice.dt = r.num("lattice.dt", def.dt);
  c.system = read_operator(r, "system");
  c.probe_a = read_operator(r, "probe_a");
  c.probe_b = read_operator(r, "probe_b");
  c.state_system = read_state(r, "system");
  c.state_a = read_state(r, "probe_a");
  c.state_b = read_state(r, "probe_b");
  c.phase = r.str("states.phase", "lattice");
  if (c.phase != "lattice" && c.phase != "continuum")
    fail(Errc::config, "states.phase", "phase must be 'lattice' or 'continuum'");
  c.rho_a = r.bump("couplings.rho_a");
  c.rho_b = r.bump("couplings.rho_b");
  c.mode_a = read_mode(r, "a");
  c.mode_b = read_mode(r, "b");
  if (r.has("sweep.lambdas")) {
    c.lambdas = to_list("sweep.lambdas", r.str("sweep.lambdas"));
  } else {
    const double lo = r.num("sweep.lambda_min", 0.0), hi = r.num("sweep.lambda_max", 1.0);
    const auto n = r.integer("sweep.lambda_count", 11);
    if (n < 1) fail(Errc::config, "sweep.lambda_count", "need at least one point");
    c.lambdas = linear_grid(lo, hi, static_cast<int>(n));
  }
  if (c.lambdas.empty()) fail(Errc::config, "sweep.lambdas", "empty grid");
  for (size_t i = 0; i < c.lambdas.size(); ++i) {
    if (c.lambdas[i] < 0.0) fail(Errc::config, "sweep.lambdas", "couplings must be non-negative");
    if (i > 0 && c.lambdas[i] <= c.lambdas[i - 1]) fail(Errc::config, "sweep.lambdas", "grid must be ascending");
  }
  if (r.has("sweep.critical_interval")) {
    const auto v = r.list("sweep.critical_interval", 2);
    c.critical_lo = v[0];
    c.critical_hi = v[1];
  } else {
    c.critical_lo = c.lambdas.front();
    c.critical_hi = c.lambdas.back();
  }
  c.critical_tol = r.num("sweep.critical_tol", 1e-4);
  c.critical_scan = static_cast<int>(r.integer("sweep.critical_scan", 40));
  if (r.has("sweep.perturb_interval")) {
    const auto v = r.list("sweep.perturb_interval", 2);
    c.perturb_lo = v[0];
    c.perturb_hi = v[1];
  }
  c.perturb_count = static_cast<int>(r.integer("sweep.perturb_count", 8));
  c.seed = static_cast<std::uint64_t>(r.integer("sweep.seed", 1));
  return c;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open scenario file " + path);
  return parse_config(in);
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "[lattice]\n"
    << "n_space = " << c.lattice.n_space << "\n"
    << "n_time = " << c.lattice.n_time << "\n"
    << "dx = " << fmt(c.lattice.dx) << "\n"
    << "dt = " << fmt(c.lattice.dt) << "\n";
  auto op = [&](const char* sec, const OperatorConfig& x) {
    o << "\n[" << sec << "]\nmass = " << fmt(x.mass) << "\n";
    if (x.well_depth != 0.0)
      o << "potential = " << fmt(x.well_depth) << ", " << fmt(x.well_center) << ", " << fmt(x.well_width) << "\n";
  };
  op("system", c.system);
  op("probe_a", c.probe_a);
  op("probe_b", c.probe_b);
  o << "\n[states]\nphase = " << c.phase << "\n";
  auto st = [&](const char* name, const StateConfig& s) {
    o << name << " = " << s.kind << "\n";
    if (s.kind == "thermal") o << name << "_temperature = " << fmt(s.temperature) << "\n";
  };
  st("system", c.state_system);
  st("probe_a", c.state_a);
  st("probe_b", c.state_b);
  o << "\n[couplings]\nrho_a = " << fmt(c.rho_a) << "\nrho_b = " << fmt(c.rho_b) << "\n";
  o << "\n[modes]\n";
  auto md = [&](const char* p, const ModeConfig& m) {
    o << p << "_kind = " << m.kind << "\n" << p << "_envelope = " << fmt(m.envelope) << "\n";
    if (m.kind == "carrier") o << p << "_omega = " << fmt(m.omega) << "\n";
    else o << p << "_second = " << fmt(m.second) << "\n";
  };
  md("a", c.mode_a);
  md("b", c.mode_b);
  o << "\n[sweep]\nlambdas = ";
  for (size_t i = 0; i < c.lambdas.size(); ++i) o << (i ? ", " : "") << fmt(c.lambdas[i]);
  o << "\ncritical_interval = " << fmt(c.critical_lo) << ", " << fmt(c.critical_hi) << "\n"
    << "critical_tol = " << fmt(c.critical_tol) << "\n"
    << "critical_scan = " << c.critical_scan << "\n"
    << "perturb_interval = " << fmt(c.perturb_lo) << ", " << fmt(c.perturb_hi) << "\n"
    << "perturb_count = " << c.perturb_count << "\n"
    << "seed = " << c.seed << "\n";
  return o.str();
}

FieldOperatorSpec build_operator(const LatticeSpec& lat, const OperatorConfig& c) {
  FieldOperatorSpec op;
  op.mass = c.mass;
  if (c.well_depth != 0.0) {
    op.potential.resize(lat.n_space);
    const double L = lat.length();
    for (int j = 0; j < lat.n_space; ++j) {
      double d = std::fmod(lat.x_at(j) - c.well_center + 0.5 * L, L);
      if (d < 0) d += L;
      const double u = (d - 0.5 * L) / c.well_width;
      op.potential[j] = std::abs(u) < 1.0 ? c.well_depth * std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
    }
  }
  return op;
}

namespace {

StateKind kind_of(const StateConfig& s) { return s.kind == "thermal" ? StateKind::thermal : StateKind::vacuum; }

}  // namespace

ModePair build_mode(const LatticeSpec& lat, const FieldOperatorSpec& op, const ModeConfig& m,
                    const std::string& key) {
  if (m.kind != "carrier" && m.kind != "pair") fail(Errc::config, key, "mode kind must be 'carrier' or 'pair'");
  try {
    Field f1, f2;
    if (m.kind == "carrier") {
      f1 = make_carrier(lat, m.envelope, m.omega, 0.0).values;
      f2 = make_carrier(lat, m.envelope, m.omega, -0.5 * M_PI).values;
      // Equal scaling keeps the quadratures balanced instead of squeezing f2.
      const double e = std::abs(causal_pairing(lat, op, f1, f2));
      if (e > 0.0) f1 *= 1.0 / std::sqrt(e), f2 *= 1.0 / std::sqrt(e);
    } else {
      f1 = make_bump(lat, m.envelope).values;
      f2 = make_bump(lat, m.second).values;
    }
    return normalize_mode(lat, op, f1, f2);
  } catch (const Error& e) {
    fail(e.code(), key, e.detail());
  }
}

HarvestScenario build_scenario(const ScenarioConfig& c) {
  const LatticeSpec& lat = c.lattice;
  if (lat.n_space < 8) fail(Errc::geometry, "lattice.n_space", "need at least 8 sites");
  if (lat.n_time < 8) fail(Errc::geometry, "lattice.n_time", "need at least 8 time steps");
  if (!(lat.dx > 0.0)) fail(Errc::geometry, "lattice.dx", "must be positive");
  if (!(lat.dt > 0.0)) fail(Errc::geometry, "lattice.dt", "must be positive");
  try {
    lat.validate();
  } catch (const Error& e) {
    fail(e.code(), "lattice.dt", e.detail());
  }
  const std::pair<const char*, const StateConfig*> kinds[3] = {
      {"states.system", &c.state_system}, {"states.probe_a", &c.state_a}, {"states.probe_b", &c.state_b}};
  for (const auto& [key, s] : kinds) {
    if (s->kind != "vacuum" && s->kind != "thermal") fail(Errc::config, key, "state must be 'vacuum' or 'thermal'");
    if (s->kind == "thermal" && !(s->temperature > 0.0))
      fail(Errc::config, std::string(key) + "_temperature", "thermal state needs a positive temperature");
  }
  if (c.phase != "lattice" && c.phase != "continuum")
    fail(Errc::config, "states.phase", "phase must be 'lattice' or 'continuum'");
  if (c.lambdas.empty()) fail(Errc::config, "sweep.lambdas", "empty grid");
  HarvestScenario sc;
  sc.coupled.lattice = lat;
  const std::pair<const char*, const OperatorConfig*> ops[3] = {
      {"system", &c.system}, {"probe_a", &c.probe_a}, {"probe_b", &c.probe_b}};
  for (int l = 0; l < 3; ++l) sc.coupled.ops[l] = build_operator(lat, *ops[l].second);
  try {
    sc.coupled.rho_a = make_bump(lat, c.rho_a).values;
  } catch (const Error& e) {
    fail(e.code(), "couplings.rho_a", e.detail());
  }
  try {
    sc.coupled.rho_b = make_bump(lat, c.rho_b).values;
  } catch (const Error& e) {
    fail(e.code(), "couplings.rho_b", e.detail());
  }
  double lmax = std::max(c.lambdas.back(), std::max(std::abs(c.critical_lo), std::abs(c.critical_hi)));
  try {
    sc.coupled.check_stability(lmax);
  } catch (const Error& e) {
    fail(e.code(), "lattice.dt", e.detail());
  }
  const StateConfig* states[3] = {&c.state_system, &c.state_a, &c.state_b};
  const PhaseModel phase = c.phase == "continuum" ? PhaseModel::continuum : PhaseModel::lattice;
  for (int l = 0; l < 3; ++l) {
    try {
      sc.states[l] = build_state(lat, sc.coupled.ops[l], kind_of(*states[l]), states[l]->temperature, phase);
    } catch (const Error& e) {
      fail(e.code(), std::string(ops[l].first) + ".mass", e.detail());
    }
  }
  sc.mode_a = build_mode(lat, sc.coupled.ops[kProbeA], c.mode_a, "modes.a_envelope");
  sc.mode_b = build_mode(lat, sc.coupled.ops[kProbeB], c.mode_b, "modes.b_envelope");
  const Mask past_a = causal_past(lat, sc.coupled.rho_a), past_b = causal_past(lat, sc.coupled.rho_b);
  const std::pair<const char*, const ModePair*> modes[2] = {{"modes.a_envelope", &sc.mode_a},
                                                             {"modes.b_envelope", &sc.mode_b}};
  for (const auto& [key, m] : modes)
    for (const Field* f : {&m->f1, &m->f2})
      if (mask_hits(past_a, *f) || mask_hits(past_b, *f))
        fail(Errc::causal_geometry, key, "mode support reaches into the causal past of a coupling zone");
  sc.lambda_grid = c.lambdas;
  return sc;
}

ModeFamily parse_mode_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open mode family file " + path);
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::config, std::string("mode family: ") + e.message());
  }
  const Reader r(tree);
  ModeFamily fam;
  fam.lattice.n_space = static_cast<int>(r.integer("lattice.n_space"));
  fam.lattice.n_time = static_cast<int>(r.integer("lattice.n_time"));
  fam.lattice.dx = r.num("lattice.dx");
  fam.lattice.dt = r.num("lattice.dt");
  fam.field = read_operator(r, "field");
  for (int i = 0; r.has("mode_" + std::to_string(i) + ".envelope"); ++i) {
    const std::string sec = "mode_" + std::to_string(i);
    ModeConfig m;
    m.kind = r.str(sec + ".kind", "carrier");
    m.envelope = r.bump(sec + ".envelope");
    if (m.kind == "carrier") m.omega = r.num(sec + ".omega");
    else if (m.kind == "pair") m.second = r.bump(sec + ".second");
    else fail(Errc::config, sec + ".kind", "mode kind must be 'carrier' or 'pair'");
    fam.modes.push_back(m);
  }
  return fam;
}

HarvestScenario parse_scenario(const std::string& path) { return build_scenario(parse_config_file(path)); }

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  if (rows.empty()) throw Error(Errc::usage, "no sweep rows to write");
  out << kSweepHeader << "\n";
  for (const SweepRow& r : rows) {
    out << fmt(r.lambda) << ',' << fmt(r.p_s) << ',' << fmt(r.nu_minus) << ',' << fmt(r.negativity) << ','
        << fmt(r.det_a) << ',' << fmt(r.det_b) << ',' << fmt(r.det_c) << ',' << fmt(r.trace_term) << "\n";
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  if (rows.empty()) throw Error(Errc::usage, "no sweep rows to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open " + path + " for writing");
  write_sweep_csv(rows, out);
  if (!out) throw Error(Errc::io, "write to " + path + " failed");
}

}  // namespace harvest
