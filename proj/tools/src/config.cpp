#include "cipwave_app/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cipwave::app {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kSideNames[] = {"left", "bottom", "right", "top"};

std::string side_name(Side s) { return kSideNames[static_cast<int>(s) - 1]; }

Side side_from_name(const std::string& name) {
  for (Side s : kAllSides) {
    if (side_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown side '" + name + "'");
}

std::string rule_name(TimeDerivativeRule r) {
  return r == TimeDerivativeRule::centered ? "centered" : "staggered";
}

TimeDerivativeRule rule_from_name(const std::string& name) {
  if (name == "centered") return TimeDerivativeRule::centered;
  if (name == "staggered") return TimeDerivativeRule::staggered;
  throw std::invalid_argument("expected centered or staggered");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

// Reads typed values out of the parsed tree, remembering which keys were
// used so that leftovers (typos) can be reported.
class Reader {
 public:
  Reader(const pt::ptree& tree, std::string name, std::map<std::string, int> lines,
         std::filesystem::path base_dir)
      : tree_(tree), name_(std::move(name)), lines_(std::move(lines)),
        base_dir_(std::move(base_dir)) {}

  [[nodiscard]] bool has_section(const std::string& section) const {
    return tree_.find(section) != tree_.not_found();
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    const auto sec = tree_.find(section);
    if (sec == tree_.not_found()) return std::nullopt;
    const auto it = sec->second.find(key);
    if (it == sec->second.not_found()) return std::nullopt;
    used_.insert(section + "." + key);
    return boost::trim_copy(it->second.data());
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    const std::string full = section + "." + key;
    std::string where = name_;
    if (const auto it = lines_.find(full); it != lines_.end()) {
      where += ":" + std::to_string(it->second);
    }
    throw ConfigError(where + ": " + full + ": " + what);
  }

  template <class T>
  T get(const std::string& section, const std::string& key, T fallback) {
    const auto text = raw(section, key);
    if (!text) return fallback;
    return convert<T>(section, key, *text);
  }

  template <class T>
  T require(const std::string& section, const std::string& key) {
    const auto text = raw(section, key);
    if (!text) {
      throw ConfigError(name_ + ": missing required key " + section + "." + key);
    }
    return convert<T>(section, key, *text);
  }

  std::filesystem::path path(const std::string& section, const std::string& key) {
    const auto text = raw(section, key);
    if (!text || text->empty()) return {};
    std::filesystem::path p(*text);
    if (p.is_relative()) p = base_dir_ / p;
    return p.lexically_normal();
  }

  template <class Enum, class Parse>
  Enum choice(const std::string& section, const std::string& key, Enum fallback,
              Parse parse) {
    const auto text = raw(section, key);
    if (!text) return fallback;
    try {
      return parse(*text);
    } catch (const std::invalid_argument& e) {
      fail(section, key, e.what());
    }
  }

  void reject_unused() const {
    for (const auto& [section, keys] : tree_) {
      if (keys.empty() && !keys.data().empty()) {
        const auto it = lines_.find(section);
        throw ConfigError(name_ + (it != lines_.end() ? ":" + std::to_string(it->second) : "") +
                          ": key '" + section + "' outside any section");
      }
      for (const auto& kv : keys) {
        const std::string full = section + "." + kv.first;
        if (used_.count(full) == 0) {
          std::string where = name_;
          if (const auto it = lines_.find(full); it != lines_.end()) {
            where += ":" + std::to_string(it->second);
          }
          throw ConfigError(where + ": unknown key " + full);
        }
      }
    }
  }

 private:
  template <class T>
  T convert(const std::string& section, const std::string& key, const std::string& text) {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      const std::string v = boost::to_lower_copy(text);
      if (v == "true" || v == "yes" || v == "1") return true;
      if (v == "false" || v == "no" || v == "0") return false;
      fail(section, key, "expected true or false, got '" + text + "'");
    } else {
      T value{};
      const char* first = text.data();
      const char* last = text.data() + text.size();
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last) {
        fail(section, key,
             std::string(std::is_integral_v<T> ? "expected an integer" : "expected a number") +
                 ", got '" + text + "'");
      }
      return value;
    }
  }

  const pt::ptree& tree_;
  std::string name_;
  std::map<std::string, int> lines_;
  std::filesystem::path base_dir_;
  std::set<std::string> used_;
};

// Line numbers of "section.key" entries, for diagnostics. The tree itself
// does not keep them.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    boost::trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line[0] == '[') {
      section = boost::trim_copy(line.substr(1, line.find(']') - 1));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = boost::trim_copy(line.substr(0, eq));
    out.emplace(section.empty() ? key : section + "." + key, no);
  }
  return out;
}

FieldSpec read_field(Reader& r, const std::string& section, FieldSpec spec) {
  spec.type = r.get<std::string>(section, "type", spec.type);
  if (spec.type != "constant" && spec.type != "gaussian" && spec.type != "file" &&
      spec.type != "truth") {
    r.fail(section, "type", "expected constant, gaussian, file or truth");
  }
  spec.base = r.get(section, "base", spec.base);
  spec.amplitude = r.get(section, "amplitude", spec.amplitude);
  if (const auto c = r.raw(section, "center")) {
    const auto parts = split_list(*c);
    if (parts.size() != 2) r.fail(section, "center", "expected two comma-separated numbers");
    try {
      spec.cx = std::stod(parts[0]);
      spec.cy = std::stod(parts[1]);
    } catch (const std::exception&) {
      r.fail(section, "center", "expected two comma-separated numbers");
    }
  }
  spec.width = r.get(section, "width", spec.width);
  if (auto f = r.path(section, "file"); !f.empty()) spec.file = f;
  spec.bubble_factor = r.get(section, "bubble_factor", spec.bubble_factor);
  if (spec.type == "file" && spec.file.empty()) {
    r.fail(section, "file", "required when type = file");
  }
  if (spec.type == "gaussian" && !(spec.width > 0.0)) {
    r.fail(section, "width", "must be positive");
  }
  return spec;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field(std::ostream& out, const std::string& section, const FieldSpec& f) {
  out << "\n[" << section << "]\n"
      << "type = " << f.type << '\n'
      << "base = " << fmt(f.base) << '\n'
      << "amplitude = " << fmt(f.amplitude) << '\n'
      << "center = " << fmt(f.cx) << ", " << fmt(f.cy) << '\n'
      << "width = " << fmt(f.width) << '\n';
  if (!f.file.empty()) out << "file = " << f.file.string() << '\n';
  out << "bubble_factor = " << fmt(f.bubble_factor) << '\n';
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& name,
                       const std::filesystem::path& base_dir) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  pt::ptree tree;
  try {
    std::istringstream parse_in(text);
    pt::read_ini(parse_in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(name + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  Reader r(tree, name, key_lines(text), base_dir);
  RunConfig c;

  c.nx = r.require<int>("grid", "nx");
  c.ny = r.get("grid", "ny", c.nx);
  c.T = r.get("grid", "T", c.T);
  c.cfl = r.get("grid", "cfl", c.cfl);
  c.frame_width = r.get("grid", "frame_width", c.frame_width);
  if (c.nx < 8) r.fail("grid", "nx", "must be at least 8");
  if (c.ny != c.nx) r.fail("grid", "ny", "only square cells on the unit square are supported");
  if (!(c.T > 0.0)) r.fail("grid", "T", "must be positive");
  if (!(c.cfl > 0.0 && c.cfl < 1.0)) r.fail("grid", "cfl", "must lie in (0, 1)");
  if (c.frame_width < 0 || 2 * c.frame_width >= c.nx) {
    r.fail("grid", "frame_width", "must satisfy 0 <= 2 * frame_width < nx");
  }

  if (r.has_section("truth.eps")) c.truth_eps = read_field(r, "truth.eps", FieldSpec{});
  if (r.has_section("truth.sigma")) c.truth_sigma = read_field(r, "truth.sigma", FieldSpec{});
  if (c.truth_eps.has_value() != c.truth_sigma.has_value()) {
    throw ConfigError(name + ": [truth.eps] and [truth.sigma] must be given together");
  }
  c.initial_eps = read_field(r, "initial.eps", c.initial_eps);
  c.initial_sigma = read_field(r, "initial.sigma", c.initial_sigma);
  for (const auto* spec : {&c.truth_eps, &c.truth_sigma}) {
    if (*spec && (*spec)->type == "truth") {
      throw ConfigError(name + ": a truth field cannot be of type 'truth'");
    }
  }
  if ((c.initial_eps.type == "truth" || c.initial_sigma.type == "truth") && !c.truth_eps) {
    throw ConfigError(name + ": initial guess of type 'truth' needs [truth.eps] and [truth.sigma]");
  }

  c.omega = r.get("source", "omega", c.omega);
  c.t_on = r.get("source", "t_on", c.t_on);
  c.amplitude = r.get("source", "amplitude", c.amplitude);

  for (Side s : kAllSides) {
    c.bc.set(s, r.choice("bc", side_name(s), c.bc.at(s), boundary_kind_from_string));
  }
  try {
    c.bc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name + ": [bc]: " + e.what());
  }

  if (const auto sides = r.raw("observation", "sides")) {
    SideSet set;
    for (const auto& part : split_list(*sides)) {
      try {
        set.insert(side_from_name(part));
      } catch (const std::invalid_argument& e) {
        r.fail("observation", "sides", e.what());
      }
    }
    if (set.empty()) r.fail("observation", "sides", "at least one side is required");
    c.observed = set;
  }
  c.obs_file = r.path("observation", "file");

  c.noise_model = r.choice("noise", "model", c.noise_model, noise_model_from_string);
  c.noise_level = r.get("noise", "level", c.noise_level);
  c.noise_seed = r.get("noise", "seed", c.noise_seed);
  if (c.noise_level < 0.0) r.fail("noise", "level", "must be >= 0");

  c.gamma_eps0 = r.get("regularization", "gamma_eps0", c.gamma_eps0);
  c.gamma_sigma0 = r.get("regularization", "gamma_sigma0", c.gamma_sigma0);
  c.p = r.get("regularization", "p", c.p);
  if (c.gamma_eps0 < 0.0) r.fail("regularization", "gamma_eps0", "must be >= 0");
  if (c.gamma_sigma0 < 0.0) r.fail("regularization", "gamma_sigma0", "must be >= 0");
  if (!(c.p > 0.0 && c.p <= 1.0)) r.fail("regularization", "p", "must lie in (0, 1]");

  AdmissibleSet& a = c.admissible;
  a.eps_background = r.get("admissible", "eps_background", a.eps_background);
  a.eps_max = r.get("admissible", "eps_max", a.eps_max);
  a.sigma_background = r.get("admissible", "sigma_background", a.sigma_background);
  a.sigma_min = r.get("admissible", "sigma_min", a.sigma_min);
  a.sigma_max = r.get("admissible", "sigma_max", a.sigma_max);
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name + ": [admissible]: " + e.what());
  }

  CgOptions& g = c.cga;
  g.tol.max_iterations = r.get("cga", "max_iterations", g.tol.max_iterations);
  g.tol.eta1_eps = r.get("cga", "eta1_eps", g.tol.eta1_eps);
  g.tol.eta1_sigma = r.get("cga", "eta1_sigma", g.tol.eta1_sigma);
  g.tol.eta2_eps = r.get("cga", "eta2_eps", g.tol.eta2_eps);
  g.tol.eta2_sigma = r.get("cga", "eta2_sigma", g.tol.eta2_sigma);
  g.alpha_max = r.get("cga", "alpha_max", g.alpha_max);
  g.alpha0_eps = r.get("cga", "alpha0_eps", g.alpha0_eps);
  g.alpha0_sigma = r.get("cga", "alpha0_sigma", g.alpha0_sigma);
  g.beta_max = r.get("cga", "beta_max", g.beta_max);
  g.max_backtracks = r.get("cga", "max_backtracks", g.max_backtracks);
  g.gradient.rule = r.choice("cga", "gradient_rule", g.gradient.rule, rule_from_name);
  if (g.tol.max_iterations < 0) r.fail("cga", "max_iterations", "must be >= 0");
  for (const char* k : {"eta1_eps", "eta1_sigma", "eta2_eps", "eta2_sigma"}) {
    if (r.get("cga", k, 0.0) < 0.0) r.fail("cga", k, "must be >= 0");
  }
  if (!(g.alpha_max > 0.0)) r.fail("cga", "alpha_max", "must be positive");
  if (g.max_backtracks < 0) r.fail("cga", "max_backtracks", "must be >= 0");

  AcgaOptions& ac = c.acga;
  ac.max_refinements = r.get("acga", "max_refinements", ac.max_refinements);
  ac.beta_eps = r.get("acga", "beta_eps", ac.beta_eps);
  ac.beta_sigma = r.get("acga", "beta_sigma", ac.beta_sigma);
  ac.mode = r.choice("acga", "mode", ac.mode, indicator_mode_from_string);
  ac.theta1_eps = r.get("acga", "theta1_eps", ac.theta1_eps);
  ac.theta1_sigma = r.get("acga", "theta1_sigma", ac.theta1_sigma);
  ac.theta2_eps = r.get("acga", "theta2_eps", ac.theta2_eps);
  ac.theta2_sigma = r.get("acga", "theta2_sigma", ac.theta2_sigma);
  if (ac.max_refinements < 0) r.fail("acga", "max_refinements", "must be >= 0");
  if (!(ac.beta_eps > 0.0 && ac.beta_eps < 1.0)) r.fail("acga", "beta_eps", "must lie in (0, 1)");
  if (!(ac.beta_sigma > 0.0 && ac.beta_sigma < 1.0)) {
    r.fail("acga", "beta_sigma", "must lie in (0, 1)");
  }

  GradCheckConfig& gc = c.gradcheck;
  gc.random_nodes = r.get("gradcheck", "random_nodes", gc.random_nodes);
  if (const auto pts = r.raw("gradcheck", "points")) {
    const auto parts = split_list(*pts);
    if (parts.size() % 2 != 0) r.fail("gradcheck", "points", "expected x, y pairs");
    try {
      for (std::size_t k = 0; k < parts.size(); k += 2) {
        gc.points.emplace_back(std::stod(parts[k]), std::stod(parts[k + 1]));
      }
    } catch (const std::exception&) {
      r.fail("gradcheck", "points", "expected x, y pairs of numbers");
    }
  }
  gc.seed = r.get("gradcheck", "seed", gc.seed);
  gc.inner_only = r.get("gradcheck", "inner_only", gc.inner_only);
  gc.h_fd = r.get("gradcheck", "h_fd", gc.h_fd);
  gc.tolerance = r.get("gradcheck", "tolerance", gc.tolerance);
  gc.threshold = r.get("gradcheck", "threshold", gc.threshold);
  gc.flip_sign = r.get("gradcheck", "flip_sign", gc.flip_sign);
  if (gc.random_nodes < 0) r.fail("gradcheck", "random_nodes", "must be >= 0");
  if (!(gc.h_fd > 0.0)) r.fail("gradcheck", "h_fd", "must be positive");

  c.snapshot_every = r.get("output", "snapshot_every", c.snapshot_every);
  if (c.snapshot_every < 0) r.fail("output", "snapshot_every", "must be >= 0");

  r.reject_unused();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  RunConfig c = parse_config(in, path.string(), path.parent_path());
  c.origin = path;
  return c;
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream out;
  out << "# effective configuration, all defaults written out\n";
  out << "\n[grid]\n"
      << "nx = " << c.nx << '\n'
      << "ny = " << c.ny << '\n'
      << "T = " << fmt(c.T) << '\n'
      << "cfl = " << fmt(c.cfl) << '\n'
      << "frame_width = " << c.frame_width << '\n';
  if (c.truth_eps) write_field(out, "truth.eps", *c.truth_eps);
  if (c.truth_sigma) write_field(out, "truth.sigma", *c.truth_sigma);
  write_field(out, "initial.eps", c.initial_eps);
  write_field(out, "initial.sigma", c.initial_sigma);

  out << "\n[source]\n"
      << "omega = " << fmt(c.omega) << '\n'
      << "t_on = " << fmt(c.t_on) << '\n'
      << "amplitude = " << fmt(c.amplitude) << '\n';
  out << "\n[bc]\n";
  for (Side s : kAllSides) out << side_name(s) << " = " << to_string(c.bc.at(s)) << '\n';

  out << "\n[observation]\nsides = ";
  const auto sides = c.observed.list();
  for (std::size_t k = 0; k < sides.size(); ++k) {
    out << (k ? ", " : "") << side_name(sides[k]);
  }
  out << '\n';
  if (!c.obs_file.empty()) out << "file = " << c.obs_file.string() << '\n';

  out << "\n[noise]\n"
      << "model = " << to_string(c.noise_model) << '\n'
      << "level = " << fmt(c.noise_level) << '\n'
      << "seed = " << c.noise_seed << '\n';
  out << "\n[regularization]\n"
      << "gamma_eps0 = " << fmt(c.gamma_eps0) << '\n'
      << "gamma_sigma0 = " << fmt(c.gamma_sigma0) << '\n'
      << "p = " << fmt(c.p) << '\n';
  const AdmissibleSet& a = c.admissible;
  out << "\n[admissible]\n"
      << "eps_background = " << fmt(a.eps_background) << '\n'
      << "eps_max = " << fmt(a.eps_max) << '\n'
      << "sigma_background = " << fmt(a.sigma_background) << '\n'
      << "sigma_min = " << fmt(a.sigma_min) << '\n'
      << "sigma_max = " << fmt(a.sigma_max) << '\n';
  const CgOptions& g = c.cga;
  out << "\n[cga]\n"
      << "max_iterations = " << g.tol.max_iterations << '\n'
      << "eta1_eps = " << fmt(g.tol.eta1_eps) << '\n'
      << "eta1_sigma = " << fmt(g.tol.eta1_sigma) << '\n'
      << "eta2_eps = " << fmt(g.tol.eta2_eps) << '\n'
      << "eta2_sigma = " << fmt(g.tol.eta2_sigma) << '\n'
      << "alpha_max = " << fmt(g.alpha_max) << '\n'
      << "alpha0_eps = " << fmt(g.alpha0_eps) << '\n'
      << "alpha0_sigma = " << fmt(g.alpha0_sigma) << '\n'
      << "beta_max = " << fmt(g.beta_max) << '\n'
      << "max_backtracks = " << g.max_backtracks << '\n'
      << "gradient_rule = " << rule_name(g.gradient.rule) << '\n';
  const AcgaOptions& ac = c.acga;
  out << "\n[acga]\n"
      << "max_refinements = " << ac.max_refinements << '\n'
      << "beta_eps = " << fmt(ac.beta_eps) << '\n'
      << "beta_sigma = " << fmt(ac.beta_sigma) << '\n'
      << "mode = " << to_string(ac.mode) << '\n'
      << "theta1_eps = " << fmt(ac.theta1_eps) << '\n'
      << "theta1_sigma = " << fmt(ac.theta1_sigma) << '\n'
      << "theta2_eps = " << fmt(ac.theta2_eps) << '\n'
      << "theta2_sigma = " << fmt(ac.theta2_sigma) << '\n';
  const GradCheckConfig& gc = c.gradcheck;
  out << "\n[gradcheck]\n"
      << "random_nodes = " << gc.random_nodes << '\n';
  if (!gc.points.empty()) {
    out << "points = ";
    for (std::size_t k = 0; k < gc.points.size(); ++k) {
      out << (k ? ", " : "") << fmt(gc.points[k].first) << ", " << fmt(gc.points[k].second);
    }
    out << '\n';
  }
  out << "seed = " << gc.seed << '\n'
      << "inner_only = " << (gc.inner_only ? "true" : "false") << '\n'
      << "h_fd = " << fmt(gc.h_fd) << '\n'
      << "tolerance = " << fmt(gc.tolerance) << '\n'
      << "threshold = " << fmt(gc.threshold) << '\n'
      << "flip_sign = " << (gc.flip_sign ? "true" : "false") << '\n';
  out << "\n[output]\n"
      << "snapshot_every = " << c.snapshot_every << '\n';
  return out.str();
}

}  // namespace cipwave::app
