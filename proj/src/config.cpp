#include "supobs/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "supobs/certificate_io.hpp"
#include "supobs/errors.hpp"

namespace supobs {

namespace pt = boost::property_tree;

std::string mode_name(SamplingMode m) { return m == SamplingMode::Static ? "static" : "dynamic"; }

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) { throw Error(Errc::ConfigError, key + ": " + why); }

double to_double(const std::string& key, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) bad(key, "expected a number, got '" + s + "'");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    bad(key, "expected a non-negative integer, got '" + s + "'");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) bad(key, "integer out of range");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(key, "expected true or false, got '" + s + "'");
}

std::vector<std::string> tokens(const std::string& s) {
  std::string t = s;
  for (char& c : t) {
    if (c == ',' || c == '\t') c = ' ';
  }
  std::istringstream is(t);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

Vec to_vec(const std::string& key, const std::string& s) {
  const auto tok = tokens(s);
  Vec v(static_cast<Eigen::Index>(tok.size()));
  for (std::size_t i = 0; i < tok.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_double(key, tok[i]);
  return v;
}

std::string fmt(double v) { return format_double(v); }

std::string fmt(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v(i));
  }
  return s;
}

bool vec_eq(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.size() == 0 || (a.array() == b.array()).all()); }

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"plant", {"model", "a", "b", "c1", "c2", "c3", "c4", "e0", "v0", "r"}},
      {"theta", {"lower", "upper"}},
      {"sampling", {"mode", "m", "alpha", "Td"}},
      {"monitor", {"lambda"}},
      {"sim", {"dt", "t_final", "record_stride", "guard"}},
      {"input", {"kind", "low", "high", "hold", "seed", "value", "amplitude", "frequency", "phase", "offset"}},
      {"init", {"x0", "xhat0"}},
      {"truth", {"p_star"}},
      {"observer", {"class", "poles", "nu", "budget", "seed", "allow_k", "certify", "gain_file"}},
      {"output", {"dir", "trace", "output_errors", "certificates"}},
      {"table", {"m_values", "modes", "workers"}},
  };
  return s;
}

SamplingMode to_mode(const std::string& key, const std::string& s) {
  if (s == "static") return SamplingMode::Static;
  if (s == "dynamic") return SamplingMode::Dynamic;
  bad(key, "expected static or dynamic, got '" + s + "'");
}

std::size_t model_nx(const std::string& model) { return model == "jansen_rit" ? 6 : 1; }
std::size_t model_np(const std::string& model) { return model == "jansen_rit" ? 2 : 1; }

}  // namespace

void ExperimentConfig::validate() const {
  if (model != "jansen_rit" && model != "scalar_linear") bad("plant.model", "must be jansen_rit or scalar_linear");
  if (model == "jansen_rit") {
    try {
      jansen_rit.validate();
    } catch (const Error&) {
      bad("plant", "Jansen-Rit constants must be positive and finite");
    }
  }
  const std::size_t nx = model_nx(model), np = model_np(model);
  if (static_cast<std::size_t>(theta_lower.size()) != np || static_cast<std::size_t>(theta_upper.size()) != np) {
    bad("theta", "lower and upper need " + std::to_string(np) + " entries");
  }
  for (Eigen::Index j = 0; j < theta_lower.size(); ++j) {
    if (!(theta_lower(j) < theta_upper(j))) bad("theta", "lower must be < upper componentwise");
  }
  if (m < 1) bad("sampling.m", "must be >= 1");
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) bad("sampling.alpha", "alpha must lie in (0,1)");
  if (Td && !(*Td > 0.0)) bad("sampling.Td", "must be > 0");
  if (mode == SamplingMode::Dynamic && (!alpha || !Td)) bad("sampling", "dynamic mode requires alpha and Td");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) bad("monitor.lambda", "must be > 0");
  if (!(dt > 0.0) || !(t_final > 0.0) || dt > t_final) bad("sim", "need 0 < dt <= t_final");
  if (record_stride < 1) bad("sim.record_stride", "must be >= 1");
  if (!(guard > 0.0)) bad("sim.guard", "must be > 0");
  try {
    input.validate();
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, std::string("input: ") + e.what());
  }
  auto state_ok = [nx](const Vec& v) { return v.size() == 1 || static_cast<std::size_t>(v.size()) == nx; };
  if (!state_ok(x0)) bad("init.x0", "needs 1 or " + std::to_string(nx) + " entries");
  if (!state_ok(xhat0)) bad("init.xhat0", "needs 1 or " + std::to_string(nx) + " entries");
  if (static_cast<std::size_t>(p_star.size()) != np) bad("truth.p_star", "needs " + std::to_string(np) + " entries");
  if (model == "jansen_rit" && observer_class != "circle_criterion") {
    bad("observer.class", "the Jansen-Rit plant needs circle_criterion observers");
  }
  if (model == "scalar_linear" && observer_class != "luenberger") {
    bad("observer.class", "the scalar linear plant needs luenberger observers");
  }
  if (observer_class == "luenberger") {
    if (poles.size() != nx) bad("observer.poles", "needs " + std::to_string(nx) + " entries");
    for (double p : poles) {
      if (!(p < 0.0)) bad("observer.poles", "poles must be negative");
    }
  }
  if (!(nu > 0.0)) bad("observer.nu", "must be > 0");
  if (budget < 1) bad("observer.budget", "must be >= 1");
  for (std::size_t v : table_m_values) {
    if (v < 1) bad("table.m_values", "entries must be >= 1");
  }
  if (table_m_values.empty()) bad("table.m_values", "needs at least one entry");
  if (table_modes.empty()) bad("table.modes", "needs at least one entry");
  if (trace_file.empty()) bad("output.trace", "must not be empty");
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return model == o.model && jansen_rit == o.jansen_rit && vec_eq(theta_lower, o.theta_lower) &&
         vec_eq(theta_upper, o.theta_upper) && mode == o.mode && m == o.m && alpha == o.alpha && Td == o.Td &&
         lambda == o.lambda && dt == o.dt && t_final == o.t_final && record_stride == o.record_stride &&
         guard == o.guard && input == o.input && vec_eq(x0, o.x0) && vec_eq(xhat0, o.xhat0) &&
         vec_eq(p_star, o.p_star) && observer_class == o.observer_class && poles == o.poles && nu == o.nu &&
         budget == o.budget && synthesis_seed == o.synthesis_seed && allow_k == o.allow_k && certify == o.certify &&
         gain_file == o.gain_file && out_dir == o.out_dir && trace_file == o.trace_file &&
         output_errors_file == o.output_errors_file && certificates_file == o.certificates_file &&
         table_m_values == o.table_m_values && table_modes == o.table_modes && table_workers == o.table_workers;
}

ExperimentConfig parse_config(std::istream& is) {
  pt::ptree root;
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::ConfigError, "line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [sec, body] : root) {
    const auto it = schema().find(sec);
    if (it == schema().end()) {
      if (body.empty()) bad(sec, "top-level keys are not allowed; put them in a section");
      bad("[" + sec + "]", "unknown section");
    }
    for (const auto& [key, val] : body) {
      if (!it->second.count(key)) bad(sec + "." + key, "unknown key");
      if (!val.empty()) bad(sec + "." + key, "nested keys are not allowed");
    }
  }

  auto get = [&root](const std::string& sec, const std::string& key) -> std::optional<std::string> {
    const auto s = root.get_child_optional(pt::ptree::path_type(sec, '\0'));
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  };
  auto require = [&](const std::string& sec, const std::string& key) {
    auto v = get(sec, key);
    if (!v) bad(sec + "." + key, "required key is missing");
    return *v;
  };
  auto num = [&](const std::string& sec, const std::string& key, double& out) {
    if (auto v = get(sec, key)) out = to_double(sec + "." + key, *v);
  };
  auto uint = [&](const std::string& sec, const std::string& key, auto& out) {
    if (auto v = get(sec, key)) out = static_cast<std::remove_reference_t<decltype(out)>>(to_uint(sec + "." + key, *v));
  };
  auto str = [&](const std::string& sec, const std::string& key, std::string& out) {
    if (auto v = get(sec, key)) out = *v;
  };

  ExperimentConfig c;
  c.model = require("plant", "model");
  auto& jr = c.jansen_rit;
  num("plant", "a", jr.a);
  num("plant", "b", jr.b);
  num("plant", "c1", jr.c1);
  num("plant", "c2", jr.c2);
  num("plant", "c3", jr.c3);
  num("plant", "c4", jr.c4);
  num("plant", "e0", jr.e0);
  num("plant", "v0", jr.v0);
  num("plant", "r", jr.r);

  c.theta_lower = to_vec("theta.lower", require("theta", "lower"));
  c.theta_upper = to_vec("theta.upper", require("theta", "upper"));

  c.mode = to_mode("sampling.mode", require("sampling", "mode"));
  uint("sampling", "m", c.m);
  if (auto v = get("sampling", "alpha")) c.alpha = to_double("sampling.alpha", *v);
  if (auto v = get("sampling", "Td")) c.Td = to_double("sampling.Td", *v);

  num("monitor", "lambda", c.lambda);

  num("sim", "dt", c.dt);
  num("sim", "t_final", c.t_final);
  uint("sim", "record_stride", c.record_stride);
  num("sim", "guard", c.guard);

  if (auto v = get("input", "kind")) c.input.kind = InputSpec::parse_kind(*v);
  num("input", "low", c.input.low);
  num("input", "high", c.input.high);
  num("input", "hold", c.input.hold);
  uint("input", "seed", c.input.seed);
  num("input", "value", c.input.value);
  num("input", "amplitude", c.input.amplitude);
  num("input", "frequency", c.input.frequency);
  num("input", "phase", c.input.phase);
  num("input", "offset", c.input.offset);

  c.x0 = to_vec("init.x0", require("init", "x0"));
  c.xhat0 = get("init", "xhat0") ? to_vec("init.xhat0", *get("init", "xhat0")) : Vec::Zero(1);
  c.p_star = to_vec("truth.p_star", require("truth", "p_star"));

  str("observer", "class", c.observer_class);
  if (!get("observer", "class")) c.observer_class = c.model == "scalar_linear" ? "luenberger" : "circle_criterion";
  if (auto v = get("observer", "poles")) {
    const Vec p = to_vec("observer.poles", *v);
    c.poles.assign(p.data(), p.data() + p.size());
  }
  num("observer", "nu", c.nu);
  uint("observer", "budget", c.budget);
  uint("observer", "seed", c.synthesis_seed);
  if (auto v = get("observer", "allow_k")) c.allow_k = to_bool("observer.allow_k", *v);
  if (auto v = get("observer", "certify")) c.certify = to_bool("observer.certify", *v);
  str("observer", "gain_file", c.gain_file);

  str("output", "dir", c.out_dir);
  str("output", "trace", c.trace_file);
  str("output", "output_errors", c.output_errors_file);
  str("output", "certificates", c.certificates_file);

  if (auto v = get("table", "m_values")) {
    c.table_m_values.clear();
    for (const auto& t : tokens(*v)) c.table_m_values.push_back(static_cast<std::size_t>(to_uint("table.m_values", t)));
  }
  if (auto v = get("table", "modes")) {
    c.table_modes.clear();
    for (const auto& t : tokens(*v)) c.table_modes.push_back(to_mode("table.modes", t));
  }
  uint("table", "workers", c.table_workers);

  c.input.nu = 1;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::ConfigError, "cannot open config file " + path);
  ExperimentConfig c = parse_config(is);
  if (!c.gain_file.empty() && std::filesystem::path(c.gain_file).is_relative()) {
    const auto beside = std::filesystem::path(path).parent_path() / c.gain_file;
    if (std::filesystem::exists(beside)) c.gain_file = beside.string();
  }
  return c;
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  pt::ptree root;
  auto put = [&root](const std::string& sec, const std::string& key, const std::string& v) {
    root.put(pt::ptree::path_type(sec + '\0' + key, '\0'), v);
  };
  put("plant", "model", c.model);
  {
    const auto& jr = c.jansen_rit;
    put("plant", "a", fmt(jr.a));
    put("plant", "b", fmt(jr.b));
    put("plant", "c1", fmt(jr.c1));
    put("plant", "c2", fmt(jr.c2));
    put("plant", "c3", fmt(jr.c3));
    put("plant", "c4", fmt(jr.c4));
    put("plant", "e0", fmt(jr.e0));
    put("plant", "v0", fmt(jr.v0));
    put("plant", "r", fmt(jr.r));
  }
  put("theta", "lower", fmt(c.theta_lower));
  put("theta", "upper", fmt(c.theta_upper));
  put("sampling", "mode", mode_name(c.mode));
  put("sampling", "m", std::to_string(c.m));
  if (c.alpha) put("sampling", "alpha", fmt(*c.alpha));
  if (c.Td) put("sampling", "Td", fmt(*c.Td));
  put("monitor", "lambda", fmt(c.lambda));
  put("sim", "dt", fmt(c.dt));
  put("sim", "t_final", fmt(c.t_final));
  put("sim", "record_stride", std::to_string(c.record_stride));
  put("sim", "guard", fmt(c.guard));
  put("input", "kind", InputSpec::kind_name(c.input.kind));
  put("input", "low", fmt(c.input.low));
  put("input", "high", fmt(c.input.high));
  put("input", "hold", fmt(c.input.hold));
  put("input", "seed", std::to_string(c.input.seed));
  put("input", "value", fmt(c.input.value));
  put("input", "amplitude", fmt(c.input.amplitude));
  put("input", "frequency", fmt(c.input.frequency));
  put("input", "phase", fmt(c.input.phase));
  put("input", "offset", fmt(c.input.offset));
  put("init", "x0", fmt(c.x0));
  put("init", "xhat0", fmt(c.xhat0));
  put("truth", "p_star", fmt(c.p_star));
  put("observer", "class", c.observer_class);
  if (!c.poles.empty()) put("observer", "poles", fmt(Eigen::Map<const Vec>(c.poles.data(), static_cast<Eigen::Index>(c.poles.size()))));
  put("observer", "nu", fmt(c.nu));
  put("observer", "budget", std::to_string(c.budget));
  put("observer", "seed", std::to_string(c.synthesis_seed));
  put("observer", "allow_k", c.allow_k ? "true" : "false");
  put("observer", "certify", c.certify ? "true" : "false");
  put("observer", "gain_file", c.gain_file);
  put("output", "dir", c.out_dir);
  put("output", "trace", c.trace_file);
  put("output", "output_errors", c.output_errors_file);
  put("output", "certificates", c.certificates_file);
  std::string ms, modes;
  for (std::size_t v : c.table_m_values) ms += (ms.empty() ? "" : " ") + std::to_string(v);
  for (SamplingMode v : c.table_modes) modes += (modes.empty() ? "" : " ") + mode_name(v);
  put("table", "m_values", ms);
  put("table", "modes", modes);
  put("table", "workers", std::to_string(c.table_workers));
  pt::write_ini(os, root);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

}  // namespace supobs
