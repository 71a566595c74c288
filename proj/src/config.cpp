#include "orthoshell/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace orthoshell {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& s, int line, const std::string& key) {
  double v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v))
    throw ConfigError("'" + key + "': expected a number, got '" + s + "'", line);
  return v;
}

int to_int(const std::string& s, int line, const std::string& key) {
  int v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw ConfigError("'" + key + "': expected an integer, got '" + s + "'", line);
  return v;
}

bool to_bool(const std::string& s, int line, const std::string& key) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + s + "'", line);
}

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

Vec3 to_vec3(const std::string& s, int line, const std::string& key) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  const auto w = split_ws(t);
  if (w.size() != 3) throw ConfigError("'" + key + "': expected three components", line);
  return {to_double(w[0], line, key), to_double(w[1], line, key), to_double(w[2], line, key)};
}

int component_index(char c, int line) {
  if (c == 'x') return 0;
  if (c == 'y') return 1;
  if (c == 'z') return 2;
  throw ConfigError(std::string("unknown component '") + c + "' (expected x, y or z)", line);
}

struct Entry {
  std::string key;
  std::string value;
  int line;
};

struct Section {
  std::string name;
  int line;
  std::vector<Entry> entries;
};

std::vector<Section> tokenize(std::istream& in) {
  std::vector<Section> sections;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header '" + line + "'", line_no);
      sections.push_back({trim(line.substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
    if (sections.empty()) throw ConfigError("key outside of any section", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (value.empty()) throw ConfigError("'" + key + "' has no value", line_no);
    sections.back().entries.push_back({key, value, line_no});
  }
  return sections;
}

/// Key lookup with duplicate and unknown-key detection.
class Keys {
 public:
  Keys(const Section& s, std::set<std::string> known, std::set<std::string> repeatable = {})
      : section_(s), repeatable_(std::move(repeatable)) {
    for (const auto& e : s.entries) {
      if (!known.count(e.key) && !repeatable_.count(e.key))
        throw ConfigError("unknown key '" + e.key + "' in [" + s.name + "]", e.line);
      if (!repeatable_.count(e.key)) {
        if (single_.count(e.key)) throw ConfigError("duplicate key '" + e.key + "' in [" + s.name + "]", e.line);
        single_[e.key] = &e;
      }
    }
  }
  const Entry* get(const std::string& key) const {
    auto it = single_.find(key);
    return it == single_.end() ? nullptr : it->second;
  }
  std::vector<const Entry*> all(const std::string& key) const {
    std::vector<const Entry*> out;
    for (const auto& e : section_.entries)
      if (e.key == key) out.push_back(&e);
    return out;
  }
  const Entry& require(const std::string& key) const {
    if (auto* e = get(key)) return *e;
    throw ConfigError("missing required key '" + key + "' in [" + section_.name + "]", section_.line);
  }

 private:
  const Section& section_;
  std::set<std::string> repeatable_;
  std::map<std::string, const Entry*> single_;
};

void read(const Keys& k, const std::string& key, double& v) {
  if (auto* e = k.get(key)) v = to_double(e->value, e->line, key);
}
void read(const Keys& k, const std::string& key, int& v) {
  if (auto* e = k.get(key)) v = to_int(e->value, e->line, key);
}
void read(const Keys& k, const std::string& key, std::string& v) {
  if (auto* e = k.get(key)) v = e->value;
}
void read(const Keys& k, const std::string& key, bool& v) {
  if (auto* e = k.get(key)) v = to_bool(e->value, e->line, key);
}

void check(bool ok, const std::string& what, const Keys& k, const std::string& key, int fallback_line) {
  if (ok) return;
  const Entry* e = k.get(key);
  throw ConfigError(what, e ? e->line : fallback_line);
}

Selector parse_selector(const std::string& text, int line) {
  Selector s{text, line};
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "boundary" || kind == "all") {
    if (colon != std::string::npos) throw ConfigError("selector '" + text + "' takes no argument", line);
    return s;
  }
  if (colon == std::string::npos) throw ConfigError("unknown selector '" + text + "'", line);
  const std::string arg = text.substr(colon + 1);
  if (kind == "edge") {
    static const std::set<std::string> edges{"bottom", "top", "left", "right", "equator", "rim"};
    if (!edges.count(arg)) throw ConfigError("unknown edge '" + arg + "'", line);
  } else if (kind == "node") {
    if (to_int(arg, line, "node") < 0) throw ConfigError("negative node id", line);
  } else if (kind == "nearest") {
    to_vec3(arg, line, "nearest");
  } else {
    throw ConfigError("unknown selector '" + text + "'", line);
  }
  return s;
}

void parse_geometry(const Section& s, RunConfig& cfg) {
  Keys k(s, {"generator", "n_meridian", "n_circumference", "radius", "hole_angle", "nx", "ny", "lx", "ly", "path",
             "refine"});
  auto& g = cfg.geometry;
  g.generator = k.require("generator").value;
  read(k, "n_meridian", g.n_meridian);
  read(k, "n_circumference", g.n_circumference);
  read(k, "radius", g.radius);
  read(k, "hole_angle", g.hole_angle);
  read(k, "nx", g.nx);
  read(k, "ny", g.ny);
  read(k, "lx", g.lx);
  read(k, "ly", g.ly);
  read(k, "path", g.path);
  read(k, "refine", g.refine);
  if (g.generator == "hemisphere") {
    check(g.n_meridian >= 1, "n_meridian must be at least 1", k, "n_meridian", s.line);
    check(g.n_circumference >= 3, "n_circumference must be at least 3", k, "n_circumference", s.line);
    check(g.radius > 0, "radius must be positive", k, "radius", s.line);
    check(g.hole_angle > 0 && g.hole_angle < 90, "hole_angle must lie in (0, 90)", k, "hole_angle", s.line);
  } else if (g.generator == "sheet") {
    check(g.nx >= 2 && g.ny >= 2, "nx and ny must be at least 2", k, "nx", s.line);
    check(g.lx > 0 && g.ly > 0, "lx and ly must be positive", k, "lx", s.line);
  } else if (g.generator == "file") {
    k.require("path");
  } else {
    throw ConfigError("unknown generator '" + g.generator + "' (expected hemisphere, sheet or file)",
                      k.get("generator")->line);
  }
  check(g.refine >= 0 && g.refine <= 6, "refine must lie in [0, 6]", k, "refine", s.line);
}

void parse_material(const Section& s, RunConfig& cfg) {
  if (std::any_of(s.entries.begin(), s.entries.end(), [](const Entry& e) { return e.key == "nu2"; })) {
    const auto it = std::find_if(s.entries.begin(), s.entries.end(), [](const Entry& e) { return e.key == "nu2"; });
    throw ConfigError("'nu2' is derived from E1 nu2 = E2 nu1 and cannot be set", it->line);
  }
  Keys k(s, {"preset", "h", "rho", "E1", "E2", "nu1", "G12", "d", "alpha_degrees", "constitutive", "align"});
  auto& m = cfg.material;
  if (auto* e = k.get("preset")) {
    try {
      m = material_preset(e->value);
    } catch (const ConfigError& err) {
      throw ConfigError(err.what(), e->line);
    }
    cfg.notes.push_back("material preset '" + e->value + "' expanded");
  } else {
    k.require("h");
    k.require("E1");
    k.require("nu1");
  }
  const bool had_e2 = k.get("E2") || k.get("preset");
  const bool had_g = k.get("G12") || k.get("preset");
  read(k, "h", m.h);
  read(k, "rho", m.rho);
  read(k, "E1", m.E1);
  read(k, "E2", m.E2);
  read(k, "nu1", m.nu1);
  read(k, "G12", m.G12);
  if (auto* e = k.get("d")) {
    m.d = to_vec3(e->value, e->line, "d");
    if (m.d.norm() < 1e-12) throw ConfigError("'d' must not be zero", e->line);
    m.d.normalize();
    m.alpha_degrees.reset();
  }
  if (auto* e = k.get("alpha_degrees")) {
    if (k.get("d")) throw ConfigError("set either 'd' or 'alpha_degrees', not both", e->line);
    m.alpha_degrees = to_double(e->value, e->line, "alpha_degrees");
  }
  if (auto* e = k.get("constitutive")) {
    try {
      m.mode = parse_constitutive_mode(e->value);
    } catch (const MaterialError& err) {
      throw ConfigError(err.what(), e->line);
    }
  }
  if (auto* e = k.get("align")) {
    try {
      parse_alignment(e->value);
    } catch (const std::exception& err) {
      throw ConfigError(err.what(), e->line);
    }
    m.align = e->value;
  }
  if (!had_e2) {
    m.E2 = m.E1;
    cfg.notes.push_back("E2 defaults to E1");
  }
  if (!had_g) {
    if (m.E1 != m.E2) throw ConfigError("missing required key 'G12' in [material] (E1 != E2)", s.line);
    m.G12 = m.E1 / (2 * (1 + m.nu1));
    cfg.notes.push_back("G12 defaults to E1 / (2 (1 + nu1))");
  }
  try {
    m.to_material().validate();
  } catch (const MaterialError& err) {
    throw ConfigError(err.what(), s.line);
  }
  if (m.mode == ConstitutiveMode::Isotropic && (m.E1 != m.E2))
    throw ConfigError("constitutive = isotropic needs E1 = E2", s.line);
  if (m.align == "never" && m.mode != ConstitutiveMode::Isotropic)
    throw ConfigError("align = never is only valid with constitutive = isotropic", k.get("align")->line);
}

void parse_boundary(const Section& s, RunConfig& cfg) {
  Keys k(s, {}, {"fix"});
  for (const Entry* e : k.all("fix")) {
    const auto w = split_ws(e->value);
    if (w.size() != 2) throw ConfigError("fix: expected '<selector> <components>'", e->line);
    for (char c : w[1]) component_index(c, e->line);
    cfg.fixes.push_back({parse_selector(w[0], e->line), w[1]});
  }
}

void parse_phase(const Section& s, RunConfig& cfg) {
  Keys k(s, {"name", "steps", "dt", "perturb", "minimize", "parameter"}, {"prescribe", "load"});
  PhaseConfig p;
  p.name = "phase" + std::to_string(cfg.phases.size() + 1);
  read(k, "name", p.name);
  read(k, "steps", p.steps);
  read(k, "dt", p.dt);
  read(k, "perturb", p.perturb);
  if (auto* e = k.get("minimize")) p.minimize = to_bool(e->value, e->line, "minimize");
  if (auto* e = k.get("parameter")) {
    const auto w = split_ws(e->value);
    if (w.size() != 2) throw ConfigError("parameter: expected '<start> <end>'", e->line);
    p.parameter_start = to_double(w[0], e->line, "parameter");
    p.parameter_end = to_double(w[1], e->line, "parameter");
  }
  check(p.steps >= 1, "steps must be at least 1", k, "steps", s.line);
  check(p.dt >= 0, "dt must not be negative", k, "dt", s.line);
  check(p.perturb >= 0, "perturb must not be negative", k, "perturb", s.line);
  for (const Entry* e : k.all("prescribe")) {
    const auto w = split_ws(e->value);
    if (w.size() != 3 || w[1].size() != 1)
      throw ConfigError("prescribe: expected '<selector> <component> <value>'", e->line);
    component_index(w[1][0], e->line);
    p.prescribe.push_back({parse_selector(w[0], e->line), w[1][0], to_double(w[2], e->line, "prescribe")});
  }
  for (const Entry* e : k.all("load")) {
    const auto w = split_ws(e->value);
    if (w.size() != 4) throw ConfigError("load: expected '<selector> <fx> <fy> <fz>'", e->line);
    p.loads.push_back({parse_selector(w[0], e->line),
                       Vec3(to_double(w[1], e->line, "load"), to_double(w[2], e->line, "load"),
                            to_double(w[3], e->line, "load"))});
  }
  cfg.phases.push_back(std::move(p));
}

void parse_solver(const Section& s, RunConfig& cfg) {
  Keys k(s, {"mode", "tol_rel", "tol_abs", "max_iterations", "max_bisections", "minimize", "damping", "seed",
             "threads"});
  auto& o = cfg.solver;
  read(k, "mode", o.mode);
  read(k, "tol_rel", o.tol_rel);
  read(k, "tol_abs", o.tol_abs);
  read(k, "max_iterations", o.max_iterations);
  read(k, "max_bisections", o.max_bisections);
  read(k, "minimize", o.minimize);
  read(k, "damping", o.damping);
  if (auto* e = k.get("seed")) {
    const int v = to_int(e->value, e->line, "seed");
    if (v < 0) throw ConfigError("seed must not be negative", e->line);
    o.seed = static_cast<unsigned>(v);
  }
  read(k, "threads", o.threads);
  check(o.mode == "static" || o.mode == "dynamic", "mode must be static or dynamic", k, "mode", s.line);
  check(o.tol_rel > 0 && o.tol_rel < 1, "tol_rel must lie in (0, 1)", k, "tol_rel", s.line);
  check(o.tol_abs >= 0, "tol_abs must not be negative", k, "tol_abs", s.line);
  check(o.max_iterations >= 1, "max_iterations must be at least 1", k, "max_iterations", s.line);
  check(o.max_bisections >= 0 && o.max_bisections <= 30, "max_bisections must lie in [0, 30]", k,
        "max_bisections", s.line);
  check(o.damping >= 0, "damping must not be negative", k, "damping", s.line);
  check(o.threads >= 1, "threads must be at least 1", k, "threads", s.line);
}

void parse_output(const Section& s, RunConfig& cfg) {
  Keys k(s, {"csv", "vtk", "metrics"}, {"monitor"});
  auto& o = cfg.output;
  read(k, "csv", o.csv);
  read(k, "vtk", o.vtk);
  read(k, "metrics", o.metrics);
  check(o.metrics == "none" || o.metrics == "hemisphere" || o.metrics == "wrinkle",
        "metrics must be none, hemisphere or wrinkle", k, "metrics", s.line);
  for (const Entry* e : k.all("monitor")) {
    const auto w = split_ws(e->value);
    if (w.size() != 2 || w[1].size() != 1) throw ConfigError("monitor: expected '<selector> <component>'", e->line);
    component_index(w[1][0], e->line);
    o.monitors.emplace_back(parse_selector(w[0], e->line), w[1][0]);
  }
}

RunConfig parse_stream(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  const auto sections = tokenize(in);
  std::set<std::string> seen;
  for (const auto& s : sections) {
    if (s.name != "phase" && seen.count(s.name)) throw ConfigError("duplicate section [" + s.name + "]", s.line);
    seen.insert(s.name);
    if (s.name == "geometry")
      parse_geometry(s, cfg);
    else if (s.name == "material")
      parse_material(s, cfg);
    else if (s.name == "boundary")
      parse_boundary(s, cfg);
    else if (s.name == "phase")
      parse_phase(s, cfg);
    else if (s.name == "solver")
      parse_solver(s, cfg);
    else if (s.name == "output")
      parse_output(s, cfg);
    else
      throw ConfigError("unknown section [" + s.name + "]", s.line);
  }
  if (!seen.count("geometry")) throw ConfigError("missing section [geometry]");
  if (!seen.count("material")) throw ConfigError("missing section [material]");
  if (cfg.phases.empty()) throw ConfigError("at least one [phase] is required");
  if (cfg.solver.mode == "dynamic") {
    for (const auto& p : cfg.phases)
      if (p.dt <= 0) throw ConfigError("phase '" + p.name + "': dynamic mode needs dt > 0");
  }
  if (cfg.output.metrics == "hemisphere" && cfg.geometry.generator != "hemisphere")
    throw ConfigError("metrics = hemisphere needs generator = hemisphere");
  if (cfg.output.metrics == "wrinkle" && cfg.geometry.generator != "sheet")
    throw ConfigError("metrics = wrinkle needs generator = sheet");
  return cfg;
}

std::vector<int> select_extreme(const ControlMesh& mesh, int axis, bool maximum) {
  const auto& x = mesh.nodes();
  double lo = x[0][axis], hi = x[0][axis];
  Vec3 bmin = x[0], bmax = x[0];
  for (const auto& p : x) {
    lo = std::min(lo, p[axis]);
    hi = std::max(hi, p[axis]);
    bmin = bmin.cwiseMin(p);
    bmax = bmax.cwiseMax(p);
  }
  const double tol = 1e-6 * (bmax - bmin).norm();
  const double target = maximum ? hi : lo;
  std::vector<int> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i][axis] - target) <= tol) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace

Material MaterialConfig::to_material() const {
  Material m;
  m.h = h;
  m.rho = rho;
  m.E1 = E1;
  m.E2 = E2;
  m.nu1 = nu1;
  m.G12 = G12;
  m.mode = mode;
  if (alpha_degrees) {
    const double a = *alpha_degrees * std::numbers::pi / 180.0;
    m.d = Vec3(-std::sin(a), std::cos(a), 0);
  } else {
    m.d = d;
  }
  return m;
}

bool MaterialConfig::operator==(const MaterialConfig& o) const {
  return preset == o.preset && h == o.h && rho == o.rho && E1 == o.E1 && E2 == o.E2 && nu1 == o.nu1 &&
         G12 == o.G12 && d == o.d && alpha_degrees == o.alpha_degrees && mode == o.mode && align == o.align;
}

bool RunConfig::operator==(const RunConfig& o) const {
  return geometry == o.geometry && material == o.material && fixes == o.fixes && phases == o.phases &&
         solver == o.solver && output == o.output;
}

Alignment parse_alignment(const std::string& name) {
  if (name == "auto") return Alignment::Auto;
  if (name == "always") return Alignment::Always;
  if (name == "never") return Alignment::Never;
  throw ConfigError("unknown align value '" + name + "' (expected auto, always or never)");
}

std::vector<std::string> material_preset_names() {
  return {"hemisphere-1.0", "hemisphere-0.9", "hemisphere-0.5", "hemisphere-0.1",
          "hemisphere-iso", "wrinkle-iso",    "wrinkle-ortho"};
}

MaterialConfig material_preset(const std::string& name) {
  struct Row {
    const char* name;
    double lambda, E_m, G;
  };
  static const Row rows[] = {{"hemisphere-1.0", 1.0, 6.825e7, 2.625e7},
                             {"hemisphere-0.9", 0.9, 6.143e7, 2.518e7},
                             {"hemisphere-0.5", 0.5, 3.413e7, 1.896e7},
                             {"hemisphere-0.1", 0.1, 6.825e6, 5.884e6}};
  MaterialConfig m;
  m.preset = name;
  for (const auto& r : rows) {
    if (name != r.name) continue;
    m.h = 0.04;
    m.rho = 1;
    m.E1 = r.E_m;
    m.E2 = 6.825e7;
    m.nu1 = 0.3 * r.lambda;
    m.G12 = r.G;
    m.d = Vec3::UnitZ();
    return m;
  }
  if (name == "hemisphere-iso") {
    m.h = 0.04;
    m.rho = 1;
    m.E1 = m.E2 = 6.825e7;
    m.nu1 = 0.3;
    m.G12 = 6.825e7 / 2.6;
    m.d = Vec3::UnitZ();
    m.mode = ConstitutiveMode::Isotropic;
    return m;
  }
  if (name == "wrinkle-iso") {
    m.h = 0.2;
    m.rho = 1e-9;
    m.E1 = m.E2 = 600;
    m.nu1 = 0.45;
    m.G12 = 600 / 2.9;
    m.mode = ConstitutiveMode::Isotropic;
    return m;
  }
  if (name == "wrinkle-ortho") {
    m.h = 0.2;
    m.rho = 1e-9;
    m.E1 = m.E2 = 106.6;
    m.nu1 = 0.22;
    m.G12 = 11.3;
    m.alpha_degrees = 30;
    return m;
  }
  std::string list;
  for (const auto& n : material_preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown material preset '" + name + "' (known: " + list + ")");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
  std::istringstream in(text);
  RunConfig cfg;
  try {
    cfg = parse_stream(in, base_dir);
    validate_config(cfg, build_mesh(cfg.geometry, base_dir));
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what(), e.line());
  } catch (const MeshError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string(), path.parent_path());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  const auto& g = cfg.geometry;
  out << "[geometry]\ngenerator = " << g.generator << "\n";
  if (g.generator == "hemisphere") {
    out << "n_meridian = " << g.n_meridian << "\nn_circumference = " << g.n_circumference
        << "\nradius = " << fmt_double(g.radius) << "\nhole_angle = " << fmt_double(g.hole_angle) << "\n";
  } else if (g.generator == "sheet") {
    out << "nx = " << g.nx << "\nny = " << g.ny << "\nlx = " << fmt_double(g.lx) << "\nly = " << fmt_double(g.ly)
        << "\n";
  } else {
    out << "path = " << g.path << "\n";
  }
  out << "refine = " << g.refine << "\n\n";

  const auto& m = cfg.material;
  out << "[material]\n";
  if (!m.preset.empty()) out << "preset = " << m.preset << "\n";
  out << "h = " << fmt_double(m.h) << "\nrho = " << fmt_double(m.rho) << "\nE1 = " << fmt_double(m.E1)
      << "\nE2 = " << fmt_double(m.E2) << "\nnu1 = " << fmt_double(m.nu1) << "\nG12 = " << fmt_double(m.G12) << "\n";
  if (m.alpha_degrees)
    out << "alpha_degrees = " << fmt_double(*m.alpha_degrees) << "\n";
  else
    out << "d = " << fmt_double(m.d.x()) << " " << fmt_double(m.d.y()) << " " << fmt_double(m.d.z()) << "\n";
  out << "constitutive = " << to_string(m.mode) << "\nalign = " << m.align << "\n\n";

  if (!cfg.fixes.empty()) {
    out << "[boundary]\n";
    for (const auto& f : cfg.fixes) out << "fix = " << f.where.text << " " << f.components << "\n";
    out << "\n";
  }
  for (const auto& p : cfg.phases) {
    out << "[phase]\nname = " << p.name << "\nsteps = " << p.steps << "\n";
    if (p.dt > 0) out << "dt = " << fmt_double(p.dt) << "\n";
    if (p.perturb > 0) out << "perturb = " << fmt_double(p.perturb) << "\n";
    if (p.minimize) out << "minimize = " << (*p.minimize ? "true" : "false") << "\n";
    out << "parameter = " << fmt_double(p.parameter_start) << " " << fmt_double(p.parameter_end) << "\n";
    for (const auto& q : p.prescribe)
      out << "prescribe = " << q.where.text << " " << q.component << " " << fmt_double(q.value) << "\n";
    for (const auto& l : p.loads)
      out << "load = " << l.where.text << " " << fmt_double(l.force.x()) << " " << fmt_double(l.force.y()) << " "
          << fmt_double(l.force.z()) << "\n";
    out << "\n";
  }
  const auto& s = cfg.solver;
  out << "[solver]\nmode = " << s.mode << "\ntol_rel = " << fmt_double(s.tol_rel) << "\ntol_abs = "
      << fmt_double(s.tol_abs) << "\nmax_iterations = " << s.max_iterations << "\nmax_bisections = "
      << s.max_bisections << "\nminimize = " << (s.minimize ? "true" : "false") << "\ndamping = "
      << fmt_double(s.damping) << "\nseed = " << s.seed << "\nthreads = " << s.threads << "\n\n";
  const auto& o = cfg.output;
  out << "[output]\n";
  if (!o.csv.empty()) out << "csv = " << o.csv << "\n";
  if (!o.vtk.empty()) out << "vtk = " << o.vtk << "\n";
  for (const auto& [sel, c] : o.monitors) out << "monitor = " << sel.text << " " << c << "\n";
  out << "metrics = " << o.metrics << "\n";
  return out.str();
}

ControlMesh build_mesh(const GeometryConfig& g, const std::filesystem::path& base_dir) {
  ControlMesh mesh;
  if (g.generator == "hemisphere") {
    mesh = gen_hemisphere(g.n_meridian, g.n_circumference, g.radius, g.hole_angle);
  } else if (g.generator == "sheet") {
    mesh = gen_rect_sheet(g.nx, g.ny, g.lx, g.ly);
  } else if (g.generator == "file") {
    std::filesystem::path p = g.path;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    mesh = load_mesh(p);
  } else {
    throw ConfigError("unknown generator '" + g.generator + "'");
  }
  for (int i = 0; i < g.refine; ++i) mesh = subdivide_quadrisect(mesh);
  return mesh;
}

std::vector<int> resolve_selector(const Selector& sel, const ControlMesh& mesh) {
  const std::string& t = sel.text;
  const auto colon = t.find(':');
  const std::string kind = t.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : t.substr(colon + 1);
  std::vector<int> out;
  if (kind == "all") {
    for (std::size_t i = 0; i < mesh.node_count(); ++i) out.push_back(static_cast<int>(i));
  } else if (kind == "boundary") {
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
      if (mesh.is_boundary_node(static_cast<int>(i))) out.push_back(static_cast<int>(i));
  } else if (kind == "node") {
    const int id = to_int(arg, sel.line, "node");
    if (id < 0 || static_cast<std::size_t>(id) >= mesh.node_count())
      throw ConfigError("node " + arg + " does not exist (mesh has " + std::to_string(mesh.node_count()) + " nodes)",
                        sel.line);
    out.push_back(id);
  } else if (kind == "nearest") {
    const Vec3 p = to_vec3(arg, sel.line, "nearest");
    int best = 0;
    double bd = (mesh.nodes()[0] - p).squaredNorm();
    for (std::size_t i = 1; i < mesh.node_count(); ++i) {
      const double d = (mesh.nodes()[i] - p).squaredNorm();
      if (d < bd) {
        bd = d;
        best = static_cast<int>(i);
      }
    }
    out.push_back(best);
  } else if (kind == "edge") {
    if (arg == "bottom")
      out = select_extreme(mesh, 1, false);
    else if (arg == "top")
      out = select_extreme(mesh, 1, true);
    else if (arg == "left")
      out = select_extreme(mesh, 0, false);
    else if (arg == "right")
      out = select_extreme(mesh, 0, true);
    else if (arg == "equator")
      out = select_extreme(mesh, 2, false);
    else if (arg == "rim")
      out = select_extreme(mesh, 2, true);
    else
      throw ConfigError("unknown edge '" + arg + "'", sel.line);
    std::erase_if(out, [&](int n) { return !mesh.is_boundary_node(n); });
  } else {
    throw ConfigError("unknown selector '" + t + "'", sel.line);
  }
  if (out.empty()) throw ConfigError("selector '" + t + "' matches no node", sel.line);
  return out;
}

void validate_config(const RunConfig& cfg, const ControlMesh& mesh) {
  for (const auto& f : cfg.fixes) resolve_selector(f.where, mesh);
  for (const auto& p : cfg.phases) {
    for (const auto& q : p.prescribe) resolve_selector(q.where, mesh);
    for (const auto& l : p.loads) resolve_selector(l.where, mesh);
  }
  for (const auto& mon : cfg.output.monitors) resolve_selector(mon.first, mesh);
  if (cfg.geometry.generator == "file" && cfg.output.metrics != "none")
    throw ConfigError("metrics need a generated geometry");
}

}  // namespace orthoshell
