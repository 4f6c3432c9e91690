#include "hystermag/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "hystermag/errors.hpp"

namespace hystermag {

namespace {

using nlohmann::json;

// JSON object plus its pointer for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) throw ConfigError("expected an object", path_.empty() ? "/" : path_);
  }

  const std::string& path() const { return path_; }
  std::string key_path(std::string_view key) const { return path_ + "/" + std::string(key); }
  bool has(std::string_view key) const { return value_.contains(std::string(key)); }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      bool known = false;
      for (auto k : keys) known = known || it.key() == k;
      if (!known) throw ConfigError("unknown key", key_path(it.key()));
    }
  }

  Node child(std::string_view key) const {
    if (!has(key)) throw ConfigError("missing required section", key_path(key));
    return Node(value_.at(std::string(key)), key_path(key));
  }

  const json& raw(std::string_view key) const {
    if (!has(key)) throw ConfigError("missing required key", key_path(key));
    return value_.at(std::string(key));
  }

  double number(std::string_view key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError("expected a number", key_path(key));
    return v.get<double>();
  }
  double number(std::string_view key, double fallback) const { return has(key) ? number(key) : fallback; }

  int integer(std::string_view key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError("expected an integer", key_path(key));
    return v.get<int>();
  }

  bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError("expected true or false", key_path(key));
    return v.get<bool>();
  }

  std::string string(std::string_view key, std::string fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError("expected a string", key_path(key));
    return v.get<std::string>();
  }

  std::vector<double> numbers(std::string_view key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError("expected an array of numbers", key_path(key));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError("expected a number", key_path(key) + "/" + std::to_string(i));
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Vec2 point(std::string_view key) const {
    const auto v = numbers(key);
    if (v.size() != 2) throw ConfigError("expected [x, y]", key_path(key));
    return {v[0], v[1]};
  }

  const json& value() const { return value_; }

 private:
  const json& value_;
  std::string path_;
};

// Re-throws library validation errors with the section path attached.
template <typename F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& ex) {
    throw ConfigError(ex.what(), path);
  }
}

EdgeCondition edge(const Node& n, std::string_view key, EdgeCondition fallback) {
  if (!n.has(key)) return fallback;
  const auto parsed = parse_edge_condition(n.string(key, ""));
  if (!parsed) throw ConfigError("expected \"dirichlet0\" or \"neumann\"", n.key_path(key));
  return *parsed;
}

void parse_geometry(const Node& n, GeometrySpec& g) {
  n.allow_only({"preset", "width", "height", "h_background", "regions", "boundary", "refinement"});
  const std::string preset = n.string("preset", n.has("regions") ? "custom" : "quarter_dipole");
  if (preset == "quarter_dipole") {
    g = GeometrySpec::quarter_dipole();
  } else if (preset == "custom") {
    g = GeometrySpec{};
    g.width = n.number("width");
    g.height = n.number("height");
    g.h_background = n.number("h_background");
    const json& regions = n.raw("regions");
    if (!regions.is_array()) throw ConfigError("expected an array", n.key_path("regions"));
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const Node r(regions[i], n.key_path("regions") + "/" + std::to_string(i));
      r.allow_only({"name", "kind", "x0", "y0", "x1", "y1", "h", "conductor"});
      RegionRect rect;
      rect.name = r.string("name", "region" + std::to_string(i));
      const auto kind = parse_region_kind(r.string("kind", ""));
      if (!kind) throw ConfigError("expected \"air\", \"iron\" or \"conductor\"", r.key_path("kind"));
      rect.kind = *kind;
      rect.x0 = r.number("x0");
      rect.y0 = r.number("y0");
      rect.x1 = r.number("x1");
      rect.y1 = r.number("y1");
      rect.h = r.number("h");
      rect.conductor = r.integer("conductor", -1);
      g.regions.push_back(rect);
    }
  } else {
    throw ConfigError("unknown geometry preset '" + preset + "'", n.key_path("preset"));
  }
  if (n.has("boundary")) {
    const Node b = n.child("boundary");
    b.allow_only({"left", "right", "bottom", "top"});
    g.left = edge(b, "left", g.left);
    g.right = edge(b, "right", g.right);
    g.bottom = edge(b, "bottom", g.bottom);
    g.top = edge(b, "top", g.top);
  }
  g.refinement = n.number("refinement", g.refinement);
  validated(n.path(), [&] { g.validate(); });
}

void parse_material(const Node& n, MaterialModel& m) {
  n.allow_only({"law", "dynamic", "mu_r", "sigma_conductor", "inversion"});
  const std::string law = n.string("law", "hysteretic");
  if (law == "linear") {
    m.law = IronLaw::kLinear;
  } else if (law == "anhysteretic") {
    m.law = IronLaw::kAnhysteretic;
  } else if (law == "hysteretic") {
    m.law = IronLaw::kHysteretic;
  } else {
    throw ConfigError("expected \"linear\", \"anhysteretic\" or \"hysteretic\"", n.key_path("law"));
  }
  m.dynamic = n.boolean("dynamic", false);
  m.mu_r_linear = n.number("mu_r", m.mu_r_linear);
  m.sigma_conductor = n.number("sigma_conductor", m.sigma_conductor);
  if (m.sigma_conductor < 0.0) throw ConfigError("must be non-negative", n.key_path("sigma_conductor"));
  if (n.has("inversion")) {
    const Node inv = n.child("inversion");
    inv.allow_only({"scheme", "tol", "max_iter", "b_floor"});
    if (inv.has("scheme")) {
      const auto s = parse_scheme(inv.string("scheme", ""));
      if (!s) throw ConfigError("unknown inversion scheme", inv.key_path("scheme"));
      m.inversion.scheme = *s;
    }
    m.inversion.tol = inv.number("tol", m.inversion.tol);
    m.inversion.max_iter = inv.integer("max_iter", m.inversion.max_iter);
    m.inversion.b_floor = inv.number("b_floor", m.inversion.b_floor);
    validated(inv.path(), [&] { m.inversion.validate(); });
  }
}

Waveform parse_waveform(const Node& n) {
  Waveform w;
  const std::string kind = n.string("waveform", "");
  const auto k = parse_waveform_kind(kind);
  if (!k) throw ConfigError("unknown or missing waveform kind", n.key_path("waveform"));
  w.kind = *k;
  w.amplitude = n.number("amplitude", 0.0);
  w.frequency = n.number("frequency", 0.0);
  w.rise_time = n.number("rise_time", w.rise_time);
  w.fall_rate_multiple = n.number("fall_rate_multiple", w.fall_rate_multiple);
  w.repetition_rate = n.number("repetition_rate", w.repetition_rate);
  if (w.kind == WaveformKind::kPiecewiseLinear) {
    w.times = n.numbers("times");
    w.values = n.numbers("values");
  }
  validated(n.path(), [&] { w.validate(); });
  return w;
}

void parse_excitation(const Node& n, CircuitSpec& c, int n_cond) {
  n.allow_only({"drive", "waveform", "amplitude", "frequency", "rise_time", "fall_rate_multiple",
                "repetition_rate", "times", "values", "orientation", "conductors"});
  const std::string drive = n.string("drive", "current");
  if (drive == "current") {
    c.drive = DriveMode::kCurrent;
  } else if (drive == "voltage") {
    c.drive = DriveMode::kVoltage;
  } else {
    throw ConfigError("expected \"current\" or \"voltage\"", n.key_path("drive"));
  }
  c.n_cond = n_cond;
  if (n.has("conductors")) {
    const json& list = n.raw("conductors");
    if (!list.is_array()) throw ConfigError("expected an array", n.key_path("conductors"));
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node item(list[i], n.key_path("conductors") + "/" + std::to_string(i));
      item.allow_only({"waveform", "amplitude", "frequency", "rise_time", "fall_rate_multiple", "repetition_rate",
                       "times", "values"});
      c.per_conductor.push_back(parse_waveform(item));
    }
  } else {
    c.source = parse_waveform(n);
  }
  if (n.has("orientation")) c.orientation = n.numbers("orientation");
  validated(n.path(), [&] { c.validate(); });
}

}  // namespace

TransientProblem RunConfig::problem() const {
  TransientProblem p;
  p.geometry = geometry;
  p.model = model;
  p.circuit = circuit;
  p.solver = solver;
  if (threads > 0) p.solver.threads = threads;
  p.dt = dt;
  p.duration = duration;
  p.probes = probes;
  return p;
}

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("invalid JSON: ") + ex.what(), "/");
  }
  const Node root(doc, "");
  root.allow_only({"name", "geometry", "material", "anhysteretic", "hysteresis", "dynamic", "excitation", "time",
                   "probes", "solver", "threads", "report"});
  RunConfig cfg;
  cfg.name = root.string("name", cfg.name);
  if (root.has("geometry")) parse_geometry(root.child("geometry"), cfg.geometry);
  if (root.has("material")) parse_material(root.child("material"), cfg.model);

  AnhystereticParams an;
  if (root.has("anhysteretic")) {
    const Node n = root.child("anhysteretic");
    n.allow_only({"Ma", "ha", "Mb", "hb"});
    an.Ma_T = n.number("Ma", an.Ma_T);
    an.ha_Apm = n.number("ha", an.ha_Apm);
    an.Mb_T = n.number("Mb", an.Mb_T);
    an.hb_Apm = n.number("hb", an.hb_Apm);
  }
  validated("/anhysteretic", [&] { cfg.model.curve = std::make_shared<const AnhystereticCurve>(an); });

  if (root.has("hysteresis")) {
    const Node n = root.child("hysteresis");
    n.allow_only({"w", "kappa", "normalize_weights"});
    std::vector<double> w = n.has("w") ? n.numbers("w") : PlayConfig::m235_35a_weights();
    std::vector<double> k = n.has("kappa") ? n.numbers("kappa") : PlayConfig::m235_35a_kappa();
    if (n.boolean("normalize_weights", true)) {
      double sum = 0.0;
      for (double v : w) sum += v;
      if (sum > 0.0)
        for (double& v : w) v /= sum;
    }
    validated(n.path(), [&] {
      cfg.model.play = std::make_shared<const PlayConfig>(std::move(w), std::move(k), cfg.model.curve);
    });
  } else {
    cfg.model.play = std::make_shared<const PlayConfig>(PlayConfig::m235_35a(cfg.model.curve));
  }

  if (root.has("dynamic")) {
    const Node n = root.child("dynamic");
    n.allow_only({"sigma_fe", "d", "enabled"});
    if (n.has("enabled")) {
      const bool enabled = n.boolean("enabled", false);
      const bool explicit_law = root.has("material") && root.child("material").has("dynamic");
      if (explicit_law && enabled != cfg.model.dynamic) {
        throw ConfigError("contradicts /material/dynamic", n.key_path("enabled"));
      }
      cfg.model.dynamic = enabled;
    }
    cfg.model.sheet.sigma_fe = n.number("sigma_fe", cfg.model.sheet.sigma_fe);
    cfg.model.sheet.d = n.number("d", cfg.model.sheet.d);
    validated(n.path(), [&] { cfg.model.sheet.validate(); });
  }

  parse_excitation(root.child("excitation"), cfg.circuit, cfg.geometry.n_conductors());

  const Node time = root.child("time");
  time.allow_only({"dt", "duration"});
  cfg.dt = time.number("dt", cfg.dt);
  cfg.duration = time.number("duration");
  if (!(cfg.dt > 0.0)) throw ConfigError("must be positive", "/time/dt");
  if (!(cfg.duration >= 0.0)) throw ConfigError("must be non-negative", "/time/duration");
  const double ratio = cfg.duration / cfg.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    throw ConfigError("must be a multiple of dt", "/time/duration");
  }

  if (root.has("probes")) {
    const Node n = root.child("probes");
    n.allow_only({"dipole", "bh"});
    if (n.has("dipole")) cfg.dipole_point = n.point("dipole");
    if (n.has("bh")) {
      const json& list = n.raw("bh");
      if (!list.is_array()) throw ConfigError("expected an array", n.key_path("bh"));
      for (std::size_t i = 0; i < list.size(); ++i) {
        const Node item(list[i], n.key_path("bh") + "/" + std::to_string(i));
        item.allow_only({"label", "point"});
        Probe p;
        p.label = item.string("label", "P" + std::to_string(i));
        p.point = item.point("point");
        p.iron = true;
        cfg.probes.push_back(p);
      }
    }
  }

  if (root.has("solver")) {
    const Node n = root.child("solver");
    n.allow_only({"newton_rtol", "newton_atol", "max_newton", "fixed_newton", "max_halvings"});
    cfg.solver.newton_rtol = n.number("newton_rtol", cfg.solver.newton_rtol);
    cfg.solver.newton_atol = n.number("newton_atol", cfg.solver.newton_atol);
    cfg.solver.max_newton = n.integer("max_newton", cfg.solver.max_newton);
    cfg.solver.fixed_newton = n.integer("fixed_newton", cfg.solver.fixed_newton);
    cfg.solver.max_halvings = n.integer("max_halvings", cfg.solver.max_halvings);
    validated(n.path(), [&] { cfg.solver.validate(); });
  }
  cfg.threads = root.integer("threads", 0);
  if (root.has("threads") && cfg.threads < 1) throw ConfigError("must be >= 1", "/threads");

  if (root.has("report")) {
    const Node n = root.child("report");
    n.allow_only({"symmetry", "gamma", "k_hyst", "k_eddy"});
    cfg.scale.symmetry = n.number("symmetry", cfg.scale.symmetry);
    cfg.aposteriori.gamma = n.number("gamma", cfg.aposteriori.gamma);
    cfg.aposteriori.k_hyst = n.number("k_hyst", cfg.aposteriori.k_hyst);
    cfg.aposteriori.k_eddy = n.number("k_eddy", cfg.aposteriori.k_eddy);
    if (!(cfg.scale.symmetry > 0.0)) throw ConfigError("must be positive", "/report/symmetry");
  }
  validated("/material", [&] { cfg.model.complete(); });
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string model_tag(const MaterialModel& model) {
  std::string law;
  switch (model.law) {
    case IronLaw::kLinear: law = "linear"; break;
    case IronLaw::kAnhysteretic: law = "anhysteretic"; break;
    case IronLaw::kHysteretic: law = "hysteretic"; break;
  }
  return law + (model.dynamic ? "-dynamic" : "-static");
}

}  // namespace hystermag
