#include "wyflow/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "wyflow/io.hpp"

namespace wyflow {

namespace {

ScenarioConfig base_positive_cap() {
  ScenarioConfig c;
  c.family = "spherical_cap";
  c.params.n = 3;
  c.params.m = 1.0;
  c.mesh = 512;
  c.flow.stepper = Stepper::SemiImplicit;
  c.flow.dt_policy = DtPolicy::Fixed;
  c.flow.monitor_stride = 10;
  return c;
}

ScenarioConfig base_flat(double m) {
  ScenarioConfig c;
  c.family = "flat_interval";
  c.params.n = 3;
  c.params.m = m;
  c.mesh = 256;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"positive_cap",        "positive_cap_perturbed", "zero_flat_constant",
          "zero_flat_perturbed", "negative_weighted",      "hyperbolic_weighted"};
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  if (name == "positive_cap") {
    c = base_positive_cap();
    c.params.phi_amp = 0.1;
    c.params.phi_freq = 1.0;
    c.flow.dt = 1e-3;
  } else if (name == "positive_cap_perturbed") {
    c = base_positive_cap();
    c.initial = InitialSpec{"trig", 1.0, 0.1, 1.0, ""};
    c.flow.dt = 1e-4;
    c.flow.tol_conv = 1e-8;
  } else if (name == "zero_flat_constant") {
    c = base_flat(1.0);
  } else if (name == "zero_flat_perturbed") {
    c = base_flat(1.0);
    c.initial = InitialSpec{"trig", 1.0, 0.2, 2.0, ""};
  } else if (name == "negative_weighted") {
    c = base_flat(2.0);
    c.params.phi_amp = 1.0;
    c.params.phi_freq = 2.0;
    c.flow.stepper = Stepper::SemiImplicit;
    c.flow.dt_policy = DtPolicy::Fixed;
  } else if (name == "hyperbolic_weighted") {
    c.family = "hyperbolic_ball";
    c.params.n = 3;
    c.params.m = 1.0;
    c.params.rho0 = 1.0;
    c.initial = InitialSpec{"trig", 1.0, 0.1, 1.0, ""};
    c.flow.stepper = Stepper::SemiImplicit;
    c.flow.dt_policy = DtPolicy::Fixed;
  } else {
    std::string known;
    for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
    throw ConfigError("unknown scenario '" + name + "' (known: " + known + ")");
  }
  c.name = name;
  c.out_dir = "out/" + name;
  return c;
}

namespace {

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  std::string where;
};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<Entry> parse_entries(const std::string& text, const std::string& source) {
  std::vector<Entry> out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + ": malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + s + "'");
    if (section.empty()) throw ConfigError(where + ": entry outside of any [section]");
    out.push_back(Entry{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), where});
  }
  return out;
}

double to_double(const Entry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(e.where + ": '" + e.key + "' expects a number, got '" + e.value + "'");
  }
}

long to_long(const Entry& e) {
  long v = 0;
  const auto* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(e.where + ": '" + e.key + "' expects an integer, got '" + e.value + "'");
  return v;
}

std::size_t to_size(const Entry& e) {
  const long v = to_long(e);
  if (v < 0) throw ConfigError(e.where + ": '" + e.key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

bool to_bool(const Entry& e) {
  std::string v = e.value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(e.where + ": '" + e.key + "' expects a boolean, got '" + e.value + "'");
}

std::optional<double> to_optional(const Entry& e) {
  if (e.value == "auto") return std::nullopt;
  return to_double(e);
}

[[noreturn]] void unknown_key(const Entry& e) {
  throw ConfigError(e.where + ": unknown key '" + e.key + "' in [" + e.section + "]");
}

void apply_entry(ScenarioConfig& c, const Entry& e) {
  const std::string& k = e.key;
  try {
    if (e.section == "scenario") {
      if (k == "name") c.name = e.value;
      else unknown_key(e);
    } else if (e.section == "background") {
      if (k == "family") {
        parse_family(e.value);
        c.family = e.value;
      } else if (k == "nodes") {
        c.mesh = to_size(e);
      } else if (k == "phi_quad") {
        c.params.phi_quad = to_optional(e);
      } else {
        auto map = c.params.to_map();
        if (!map.count(k) && k != "phi_quad") unknown_key(e);
        map[k] = to_double(e);
        const std::optional<double> quad = c.params.phi_quad;
        c.params = FamilyParams::from_map(map);
        c.params.phi_quad = quad;
      }
    } else if (e.section == "initial") {
      if (k == "kind") {
        if (e.value != "constant" && e.value != "trig" && e.value != "file")
          throw ConfigError(e.where + ": initial kind must be constant, trig or file");
        c.initial.kind = e.value;
      } else if (k == "value") c.initial.value = to_double(e);
      else if (k == "amplitude") c.initial.amplitude = to_double(e);
      else if (k == "frequency") c.initial.frequency = to_double(e);
      else if (k == "path") c.initial.path = e.value;
      else unknown_key(e);
    } else if (e.section == "flow") {
      FlowConfig& f = c.flow;
      if (k == "stepper") f.stepper = parse_stepper(e.value);
      else if (k == "dt_policy") f.dt_policy = parse_dt_policy(e.value);
      else if (k == "dt") f.dt = to_double(e);
      else if (k == "s_cfl") f.s_cfl = to_double(e);
      else if (k == "tol_conv") f.tol_conv = to_double(e);
      else if (k == "tol_residual") f.tol_residual = to_double(e);
      else if (k == "max_steps") f.max_steps = to_long(e);
      else if (k == "renormalize") f.renormalize = to_bool(e);
      else if (k == "monitor_stride") f.monitor_stride = to_long(e);
      else if (k == "p_lyapunov") f.p_lyapunov = to_optional(e);
      else if (k == "sigma") f.sigma = to_optional(e);
      else unknown_key(e);
    } else if (e.section == "output") {
      if (k == "dir") c.out_dir = e.value;
      else if (k == "format") {
        if (e.value != "csv" && e.value != "json") throw ConfigError(e.where + ": format must be csv or json");
        c.format = e.value;
      } else unknown_key(e);
    } else if (e.section == "run") {
      if (k == "seed") c.seed = to_size(e);
      else unknown_key(e);
    } else if (e.section == "spectrum") {
      if (k == "k") c.spectrum_k = to_size(e);
      else unknown_key(e);
    } else if (e.section == "verify") {
      VerifySpec& v = c.verify;
      if (k == "suites") {
        v.suites.clear();
        std::istringstream in(e.value);
        std::string item;
        while (std::getline(in, item, ',')) {
          item = trim(item);
          if (item.empty()) continue;
          if (item != "direct_curvature" && item != "ibp" && item != "dense_spectrum" && item != "dr_dt")
            throw ConfigError(e.where + ": unknown verify suite '" + item + "'");
          v.suites.push_back(item);
        }
      } else if (k == "order_min") v.order_min = to_double(e);
      else if (k == "eig_rel") v.eig_rel = to_double(e);
      else if (k == "ratio_lo") v.ratio_lo = to_double(e);
      else if (k == "ratio_hi") v.ratio_hi = to_double(e);
      else if (k == "seeds") v.seeds = static_cast<int>(to_long(e));
      else unknown_key(e);
    } else {
      throw ConfigError(e.where + ": unknown section [" + e.section + "]");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(e.where + ": " + ex.what());
  }
}

std::string opt(const std::optional<double>& v) { return v ? io::format_double(*v) : "auto"; }

}  // namespace

void apply_ini(ScenarioConfig& config, const std::string& text, const std::string& source) {
  for (const Entry& e : parse_entries(text, source)) apply_entry(config, e);
}

ScenarioConfig load_config(const std::optional<std::string>& scenario,
                           const std::optional<std::filesystem::path>& config_path) {
  std::string text;
  std::string source = "<none>";
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("cannot open config file " + config_path->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    source = config_path->string();
  }
  std::optional<std::string> base = scenario;
  if (!base)
    for (const Entry& e : parse_entries(text, source))
      if (e.section == "scenario" && e.key == "name") base = e.value;
  ScenarioConfig c;
  if (base && *base != "custom") c = preset(*base);
  apply_ini(c, text, source);
  if (scenario) c.name = *scenario;
  return c;
}

std::string to_ini(const ScenarioConfig& c) {
  using io::format_double;
  std::ostringstream os;
  os << "[scenario]\nname = " << c.name << "\n\n";
  os << "[background]\nfamily = " << c.family << "\nnodes = " << c.mesh << '\n';
  for (const auto& [k, v] : c.params.to_map())
    if (k != "phi_quad") os << k << " = " << format_double(v) << '\n';
  os << "phi_quad = " << opt(c.params.phi_quad) << "\n\n";
  os << "[initial]\nkind = " << c.initial.kind << "\nvalue = " << format_double(c.initial.value)
     << "\namplitude = " << format_double(c.initial.amplitude)
     << "\nfrequency = " << format_double(c.initial.frequency) << '\n';
  if (!c.initial.path.empty()) os << "path = " << c.initial.path << '\n';
  const FlowConfig& f = c.flow;
  os << "\n[flow]\nstepper = " << stepper_id(f.stepper) << "\ndt_policy = " << dt_policy_id(f.dt_policy)
     << "\ndt = " << format_double(f.dt) << "\ns_cfl = " << format_double(f.s_cfl)
     << "\ntol_conv = " << format_double(f.tol_conv) << "\ntol_residual = " << format_double(f.tol_residual)
     << "\nmax_steps = " << f.max_steps << "\nrenormalize = " << (f.renormalize ? "true" : "false")
     << "\nmonitor_stride = " << f.monitor_stride << "\np_lyapunov = " << opt(f.p_lyapunov)
     << "\nsigma = " << opt(f.sigma) << "\n\n";
  os << "[output]\ndir = " << c.out_dir << "\nformat = " << c.format << "\n\n";
  os << "[run]\nseed = " << c.seed << "\n\n";
  os << "[spectrum]\nk = " << c.spectrum_k << "\n\n";
  os << "[verify]\nsuites = ";
  for (std::size_t i = 0; i < c.verify.suites.size(); ++i) os << (i ? ", " : "") << c.verify.suites[i];
  os << "\norder_min = " << format_double(c.verify.order_min) << "\neig_rel = " << format_double(c.verify.eig_rel)
     << "\nratio_lo = " << format_double(c.verify.ratio_lo) << "\nratio_hi = " << format_double(c.verify.ratio_hi)
     << "\nseeds = " << c.verify.seeds << '\n';
  return os.str();
}

Background build_scenario_background(const ScenarioConfig& config) {
  return build_scenario_background(config, config.mesh);
}

Background build_scenario_background(const ScenarioConfig& config, std::size_t mesh) {
  return build_background(parse_family(config.family), config.params, mesh);
}

Field initial_field(const Background& bg, const ScenarioConfig& config) {
  const InitialSpec& s = config.initial;
  if (s.kind == "constant") return Field(bg.size(), s.value);
  if (s.kind == "trig") {
    const GridSpec& g = bg.grid();
    const double L = g.hi[0] - g.lo[0];
    return sample(bg, [&](double x, double) {
      return s.value + s.amplitude * std::cos(s.frequency * std::numbers::pi * (x - g.lo[0]) / L);
    });
  }
  if (s.kind == "file") {
    if (s.path.empty()) throw ConfigError("initial kind 'file' needs a path");
    Field w = io::read_field_csv(s.path);
    if (w.size() != bg.size())
      throw ConfigError("initial field " + s.path + " has " + std::to_string(w.size()) + " values, grid has " +
                        std::to_string(bg.size()));
    return w;
  }
  throw ConfigError("unknown initial kind '" + s.kind + "'");
}

}  // namespace wyflow
