#include "rflab/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rflab/error.hpp"

namespace rflab {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "task", "seed", "workers", "output.dir",
      "model.n", "model.kappa",
      "scale.variant", "scale.K", "scale.a0", "scale.table",
      "tau.min", "tau.max",
      "grid.rho_min", "grid.rho_max", "grid.rho_nodes",
      "grid.tau_min", "grid.tau_max", "grid.tau_nodes",
      "field.multistart",
      "quantities.muller_convention",
      "heat.solution", "heat.terminal", "heat.value", "heat.slope", "heat.offset", "heat.scale",
      "heat.amplitude", "heat.shift", "heat.nodes", "heat.window",
      "estimate.R", "estimate.T", "estimate.K", "estimate.A", "estimate.cutoff_grid",
      "liouville.r_list", "liouville.probe_rho", "liouville.probe_tau",
      "scaling.K", "scaling.t_grid", "scaling.v_grid", "scaling.ancient_t_grid",
      "lgeodesic.rho", "lgeodesic.tau", "lgeodesic.knots"};
  return keys;
}

double to_real(const std::string& key, const std::string& text) {
  const std::string t = boost::trim_copy(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("config: " + key + " expects a number, got '" + text + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = boost::trim_copy(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("config: " + key + " expects an integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("config: " + key + " expects a boolean, got '" + text + "'");
}

class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  template <class F>
  void get(const std::string& key, F&& apply) const {
    auto it = values_.find(key);
    if (it != values_.end()) apply(it->second);
  }
  void real(const std::string& key, double& out) const {
    get(key, [&](const std::string& v) { out = to_real(key, v); });
  }
  void integer(const std::string& key, int& out) const {
    get(key, [&](const std::string& v) { out = static_cast<int>(to_integer(key, v)); });
  }
  void list(const std::string& key, std::vector<double>& out) const {
    get(key, [&](const std::string& v) {
      try {
        out = parse_real_list(v);
      } catch (const ConfigError& e) {
        throw ConfigError("config: " + key + ": " + e.what());
      }
    });
  }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& at(const std::string& key) const { return values_.at(key); }

 private:
  std::map<std::string, std::string> values_;
};

void check_grid(const GridSpec& g) {
  if (g.rho_nodes < 2 || g.tau_nodes < 2) throw ConfigError("config: grid needs >= 2 nodes per axis");
  if (!(g.rho_hi > g.rho_lo)) throw ConfigError("config: grid.rho_max must exceed grid.rho_min");
  if (!(g.tau_hi > g.tau_lo)) throw ConfigError("config: grid.tau_max must exceed grid.tau_min");
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  const std::string t = boost::trim_copy(text);
  if (t.empty()) throw ConfigError("empty list");
  std::vector<std::string> parts;
  if (t.find(':') != std::string::npos) {
    boost::split(parts, t, boost::is_any_of(":"));
    if (parts.size() != 3) throw ConfigError("range must be lo:hi:count");
    const double lo = to_real("range", parts[0]);
    const double hi = to_real("range", parts[1]);
    const long long count = to_integer("range", parts[2]);
    if (count < 1) throw ConfigError("range count must be >= 1");
    if (count == 1) return {lo};
    std::vector<double> out(static_cast<std::size_t>(count));
    for (long long k = 0; k < count; ++k) out[k] = lo + (hi - lo) * double(k) / double(count - 1);
    out.back() = hi;
    return out;
  }
  boost::split(parts, t, boost::is_any_of(","));
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(to_real("list", p));
  return out;
}

scale::Tabulated read_scale_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open scale table " + path.string());
  scale::Tabulated tab;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    boost::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    boost::split(cells, line, boost::is_any_of(","));
    if (cells.size() != 2) throw ConfigError("config: scale table rows need two columns");
    double tau = 0.0, a = 0.0;
    try {
      tau = to_real("table tau", cells[0]);
      a = to_real("table a", cells[1]);
    } catch (const ConfigError&) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw;
    }
    first = false;
    tab.tau.push_back(tau);
    tab.a.push_back(a);
  }
  if (tab.tau.size() < 5) throw ConfigError("config: scale table needs >= 5 rows");
  return tab;
}

ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  // read_ini only knows full-line comments; drop trailing "; ..." or "# ..."
  // when the marker follows whitespace.
  auto strip = [](std::string v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
      if ((v[k] == ';' || v[k] == '#') && (v[k - 1] == ' ' || v[k - 1] == '\t')) {
        v.erase(k);
        break;
      }
    }
    return boost::trim_copy(v);
  };
  std::map<std::string, std::string> flat;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      flat[name] = strip(node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) flat[name + "." + key] = strip(leaf.data());
  }
  for (const auto& [key, value] : flat) {
    if (!known_keys().count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  const Reader r(flat);

  ScenarioConfig cfg;
  r.get("task", [&](const std::string& v) { cfg.task = boost::trim_copy(v); });
  r.get("seed", [&](const std::string& v) {
    const long long s = to_integer("seed", v);
    if (s < 0) throw ConfigError("config: seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  });
  r.get("workers", [&](const std::string& v) {
    const long long w = to_integer("workers", v);
    if (w < 0) throw ConfigError("config: workers must be non-negative");
    cfg.workers = static_cast<unsigned>(w);
  });
  r.get("output.dir", [&](const std::string& v) { cfg.output_dir = boost::trim_copy(v); });

  r.integer("model.n", cfg.model.dimension);
  r.get("model.kappa", [&](const std::string& v) {
    const long long k = to_integer("model.kappa", v);
    if (k < -1 || k > 1) throw ConfigError("config: model.kappa must be -1, 0 or 1");
    cfg.model.curvature = static_cast<Curvature>(k);
  });

  std::string variant = "static";
  r.get("scale.variant", [&](const std::string& v) { variant = boost::to_lower_copy(boost::trim_copy(v)); });
  r.real("scale.a0", cfg.scale.a0);
  if (variant == "static") {
    cfg.scale.variant = scale::Static{};
  } else if (variant == "backward_ricci" || variant == "backwardricci") {
    cfg.scale.variant = scale::BackwardRicci{};
  } else if (variant == "backward_k_ricci" || variant == "backwardkricci") {
    scale::BackwardKRicci k;
    if (!r.has("scale.K")) throw ConfigError("config: backward_k_ricci needs scale.K");
    r.real("scale.K", k.K);
    cfg.scale.variant = k;
  } else if (variant == "tabulated") {
    if (!r.has("scale.table")) throw ConfigError("config: tabulated needs scale.table");
    std::filesystem::path p = boost::trim_copy(r.at("scale.table"));
    if (p.is_relative()) p = base_dir / p;
    cfg.scale.variant = read_scale_table(p);
  } else {
    throw ConfigError("config: unknown scale.variant '" + variant + "'");
  }

  r.real("tau.min", cfg.tau.lo);
  r.real("tau.max", cfg.tau.hi);
  if (!(cfg.tau.hi > cfg.tau.lo)) throw ConfigError("config: tau.max must exceed tau.min");

  r.real("grid.rho_min", cfg.grid.rho_lo);
  r.real("grid.rho_max", cfg.grid.rho_hi);
  r.integer("grid.rho_nodes", cfg.grid.rho_nodes);
  r.real("grid.tau_min", cfg.grid.tau_lo);
  r.real("grid.tau_max", cfg.grid.tau_hi);
  r.integer("grid.tau_nodes", cfg.grid.tau_nodes);
  check_grid(cfg.grid);

  r.get("field.multistart", [&](const std::string& v) { cfg.multistart = to_bool("field.multistart", v); });
  r.get("quantities.muller_convention", [&](const std::string& v) {
    try {
      cfg.convention = muller_convention_from_string(boost::trim_copy(v));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  });

  auto& h = cfg.heat;
  r.get("heat.solution", [&](const std::string& v) { h.solution = boost::trim_copy(v); });
  r.get("heat.terminal", [&](const std::string& v) { h.terminal = boost::trim_copy(v); });
  r.real("heat.value", h.value);
  r.real("heat.slope", h.slope);
  r.real("heat.offset", h.offset);
  r.real("heat.scale", h.scale);
  r.real("heat.amplitude", h.amplitude);
  r.real("heat.shift", h.shift);
  r.integer("heat.nodes", h.nodes);
  r.real("heat.window", h.window);
  const std::set<std::string> kinds = {"constant", "linear", "exp", "eigen"};
  if (!kinds.count(h.solution) && h.solution != "numeric") {
    throw ConfigError("config: unknown heat.solution '" + h.solution + "'");
  }
  if (!kinds.count(h.terminal)) throw ConfigError("config: unknown heat.terminal '" + h.terminal + "'");

  auto& e = cfg.estimate;
  r.list("estimate.R", e.R);
  r.list("estimate.T", e.T);
  r.real("estimate.K", e.K);
  r.get("estimate.A", [&](const std::string& v) { e.A = to_real("estimate.A", v); });
  r.integer("estimate.cutoff_grid", e.cutoff_grid);
  if (e.R.size() != e.T.size()) throw ConfigError("config: estimate.R and estimate.T differ in length");

  r.list("liouville.r_list", cfg.liouville.R_list);
  r.real("liouville.probe_rho", cfg.liouville.probe_rho);
  r.real("liouville.probe_tau", cfg.liouville.probe_tau);

  r.list("scaling.K", cfg.scaling.K);
  r.list("scaling.t_grid", cfg.scaling.t_grid);
  r.list("scaling.v_grid", cfg.scaling.v_grid);
  r.list("scaling.ancient_t_grid", cfg.scaling.ancient_t_grid);

  r.real("lgeodesic.rho", cfg.lgeodesic.rho);
  r.real("lgeodesic.tau", cfg.lgeodesic.tau);
  r.integer("lgeodesic.knots", cfg.lgeodesic.knots);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  return parse_config(in, path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace rflab
