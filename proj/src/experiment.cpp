#include "khk/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace khk {

namespace {

using nlohmann::json;

const std::vector<std::string> kTopLevelKeys = {"system", "x0", "eps", "steps",
                                                "seed",   "hk", "verify"};

[[noreturn]] void missing(const std::string& path) {
  throw ConfigError("config: missing field \"" + path + "\"");
}

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw ConfigError("config: field \"" + path + "\" " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

double read_number(const json& obj, const std::string& key, const std::string& prefix) {
  const std::string path = join(prefix, key);
  if (!obj.contains(key)) missing(path);
  const json& v = obj.at(key);
  if (!v.is_number()) bad_field(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad_field(path, "must be finite");
  return x;
}

std::int64_t read_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad_field(path, "must be an integer");
  if (v.is_number_unsigned() &&
      v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    bad_field(path, "is out of range");
  }
  return v.get<std::int64_t>();
}

Vector read_vector(const json& obj, const std::string& key, const std::string& prefix,
                   int expected = -1) {
  const std::string path = join(prefix, key);
  if (!obj.contains(key)) missing(path);
  const json& v = obj.at(key);
  if (!v.is_array()) bad_field(path, "must be an array of numbers");
  if (expected >= 0 && static_cast<int>(v.size()) != expected) {
    bad_field(path, "must have " + std::to_string(expected) + " entries");
  }
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad_field(path, "must be an array of numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  if (!out.allFinite()) bad_field(path, "must be finite");
  return out;
}

Vec3 read_vec3(const json& obj, const std::string& key, const std::string& prefix) {
  return read_vector(obj, key, prefix, 3);
}

std::vector<std::string> param_keys(SystemKind kind) {
  switch (kind) {
    case SystemKind::GeneralClebsch:
      return {"a", "b"};
    case SystemKind::FirstClebsch:
    case SystemKind::SecondClebsch:
      return {"omega"};
    case SystemKind::Kirchhoff:
      return {"a1", "a3", "b1", "b3"};
    case SystemKind::Lagrange:
      return {"alpha", "gamma"};
    case SystemKind::PlanarFamily:
      return {"a", "b", "c", "ell", "ell0", "extra"};
  }
  return {};
}

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& prefix) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("config: unknown field \"" + join(prefix, item.key()) + "\"");
    }
  }
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

SystemKind parse_kind(const json& v, const std::string& path) {
  if (!v.is_string()) bad_field(path, "must be a system kind string");
  try {
    return kind_from_name(v.get<std::string>());
  } catch (const InvalidParams& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

System checked_system(const SystemParams& params) {
  try {
    return build_system(params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: invalid system parameters: ") + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  if (!std::isfinite(c.eps) || c.eps == 0.0) bad_field("eps", "must be finite and nonzero");
  if (c.steps < 0) bad_field("steps", "must be non-negative");
  if (c.hk.max_order < 0) bad_field("hk.max_order", "must be non-negative");
  if (c.hk.window < 5) bad_field("hk.window", "must be at least 5");
  if (c.verify.trials < 1) bad_field("verify.trials", "must be positive");
  if (c.verify.orbits < 1) bad_field("verify.orbits", "must be positive");
  const System sys = checked_system(c.params);
  if (c.x0 && c.x0->size() != sys.dim()) {
    bad_field("x0", "must have " + std::to_string(sys.dim()) + " entries for " +
                        std::string(kind_name(sys.kind())));
  }
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

// One sentence per check family: the statement the check tests.
std::string describe_check(const std::string& name) {
  auto starts = [&name](std::string_view prefix) { return name.rfind(prefix, 0) == 0; };
  auto argument = [&name]() {
    const auto open = name.find('[');
    return open == std::string::npos ? std::string() : name.substr(open + 1, name.size() - open - 2);
  };
  if (name == "step_residual") {
    return "each step solves the polarized equation (xt - x)/eps = 2 Q(x, xt) + B(x + xt) + 2c";
  }
  if (name == "reversibility") return "the map is reversible: Phi(Phi(x, eps), -eps) = x";
  if (name == "jacobian_identity") {
    return "det dPhi(x) = Delta(xt; -eps) / Delta(x; eps)";
  }
  if (starts("conservation[")) return argument() + " is an integral of the map";
  if (name == "m3_exact") return "m3 is reproduced exactly by every step";
  if (starts("measure[")) {
    return "dx / phi is an invariant measure for phi = " + argument() + " * Delta(x; eps)";
  }
  if (name == "planar_fhat_equals_f") {
    return "on orbits the bilinear form of the planar integral equals the quadratic one";
  }
  if (name == "identities_clebsch1") {
    return "the four one-step coefficient identities of the first Clebsch flow";
  }
  if (name == "closed_form_null_vectors") {
    return "the coefficient vectors are expressed through I0 and J0";
  }
  if (starts("bilinear_hypothesis[")) {
    return "the bilinear form " + argument() +
           " is symmetric and even in eps, as the measure construction requires";
  }
  if (starts("wronskian_basis[")) {
    return "the discrete Wronskians of order " + argument() +
           " form an HK basis with a one-dimensional null space";
  }
  if (starts("wronskian_coefficients[")) {
    return "the Wronskian null vector equals the closed-form coefficients " + argument();
  }
  if (starts("psi_basis[")) {
    const std::string g = argument() == "0" ? "g" : "G";
    return "(" + g + "1, " + g + "2, " + g + "3, 1) form an HK basis with the closed-form null vector";
  }
  if (starts("functional_rank[")) {
    return "the integrals " + argument() + " are functionally independent";
  }
  if (name == "continuous_wronskian") {
    return "the continuous flow satisfies its Wronskian relation";
  }
  if (name == "flow_invariants") {
    return "the Hamiltonian and the Casimirs are constant along the continuous flow";
  }
  if (name == "poisson_brackets") {
    return "the two Clebsch Hamiltonians commute and K1, K2 are Casimirs";
  }
  return name;
}

std::string short_number(double value) {
  std::array<char, 32> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 3);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

SystemKind ExperimentConfig::kind() const {
  return std::visit(
      [](const auto& p) -> SystemKind {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ClebschParams>) return SystemKind::GeneralClebsch;
        else if constexpr (std::is_same_v<T, FirstClebschParams>) return SystemKind::FirstClebsch;
        else if constexpr (std::is_same_v<T, SecondClebschParams>) return SystemKind::SecondClebsch;
        else if constexpr (std::is_same_v<T, KirchhoffParams>) return SystemKind::Kirchhoff;
        else if constexpr (std::is_same_v<T, LagrangeParams>) return SystemKind::Lagrange;
        else return SystemKind::PlanarFamily;
      },
      params);
}

static std::optional<QuadraticVectorField> read_extra(const json& p, const std::string& prefix) {
  if (!p.contains("extra")) return std::nullopt;
  try {
    return field_from_json(p.at("extra"));
  } catch (const std::exception& e) {
    bad_field(join(prefix, "extra"), std::string("is not a valid field: ") + e.what());
  }
}

SystemParams params_from_json(SystemKind kind, const json& p) {
  const std::string prefix = "system.params";
  if (!p.is_object()) bad_field(prefix, "must be an object");
  std::vector<std::string> allowed = param_keys(kind);
  reject_unknown(p, allowed, prefix);
  switch (kind) {
    case SystemKind::GeneralClebsch: {
      ClebschParams out;
      out.a = read_vec3(p, "a", prefix);
      out.b = read_vec3(p, "b", prefix);
      return out;
    }
    case SystemKind::FirstClebsch:
      return FirstClebschParams{read_vec3(p, "omega", prefix)};
    case SystemKind::SecondClebsch:
      return SecondClebschParams{read_vec3(p, "omega", prefix)};
    case SystemKind::Kirchhoff:
      return KirchhoffParams{read_number(p, "a1", prefix), read_number(p, "a3", prefix),
                             read_number(p, "b1", prefix), read_number(p, "b3", prefix)};
    case SystemKind::Lagrange:
      return LagrangeParams{read_number(p, "alpha", prefix), read_number(p, "gamma", prefix)};
    case SystemKind::PlanarFamily:
      return PlanarFamilyParams{read_number(p, "a", prefix), read_number(p, "b", prefix),
                                read_number(p, "c", prefix), read_vector(p, "ell", prefix),
                                read_number(p, "ell0", prefix), read_extra(p, prefix)};
  }
  throw ConfigError("config: unknown system kind");
}

json params_to_json(const SystemParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ClebschParams>) {
          return {{"a", vec_json(p.a)}, {"b", vec_json(p.b)}};
        } else if constexpr (std::is_same_v<T, FirstClebschParams> ||
                             std::is_same_v<T, SecondClebschParams>) {
          return {{"omega", vec_json(p.omega)}};
        } else if constexpr (std::is_same_v<T, KirchhoffParams>) {
          return {{"a1", p.a1}, {"a3", p.a3}, {"b1", p.b1}, {"b3", p.b3}};
        } else if constexpr (std::is_same_v<T, LagrangeParams>) {
          return {{"alpha", p.alpha}, {"gamma", p.gamma}};
        } else {
          json out = {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"ell", vec_json(p.ell)},
                      {"ell0", p.ell0}};
          if (p.extra) {
            json field;
            to_json(field, *p.extra);
            out["extra"] = std::move(field);
          }
          return out;
        }
      },
      params);
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  if (!j.contains("system")) missing("system");
  const json& sys_json = j.at("system");
  ExperimentConfig cfg;
  const std::vector<std::string>& allowed = kTopLevelKeys;

  if (sys_json.is_object()) {
    reject_unknown(sys_json, {"kind", "params"}, "system");
    if (!sys_json.contains("kind")) missing("system.kind");
    const SystemKind kind = parse_kind(sys_json.at("kind"), "system.kind");
    if (!sys_json.contains("params")) missing("system.params");
    cfg.params = params_from_json(kind, sys_json.at("params"));
    reject_unknown(j, allowed, "");
  } else {
    // Flat form: parameters sit next to the kind at the top level.
    const SystemKind kind = parse_kind(sys_json, "system");
    json params = json::object();
    const auto keys = param_keys(kind);
    for (const auto& item : j.items()) {
      if (std::find(keys.begin(), keys.end(), item.key()) != keys.end()) {
        params[item.key()] = item.value();
      } else if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
        throw ConfigError("config: unknown field \"" + item.key() + "\"");
      }
    }
    try {
      cfg.params = params_from_json(kind, params);
    } catch (const ConfigError& e) {
      // Report flat-form fields by their top-level names.
      std::string msg = e.what();
      const std::string nested = "system.params.";
      if (const auto pos = msg.find(nested); pos != std::string::npos) msg.erase(pos, nested.size());
      throw ConfigError(msg);
    }
  }

  if (j.contains("x0")) cfg.x0 = read_vector(j, "x0", "");
  if (j.contains("eps")) cfg.eps = read_number(j, "eps", "");
  if (j.contains("steps")) {
    const auto steps = read_integer(j.at("steps"), "steps");
    if (steps < 0 || steps > std::numeric_limits<int>::max()) bad_field("steps", "is out of range");
    cfg.steps = static_cast<int>(steps);
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned()) bad_field("seed", "must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("hk")) {
    const json& hk = j.at("hk");
    if (!hk.is_object()) bad_field("hk", "must be an object");
    reject_unknown(hk, {"max_order", "window"}, "hk");
    if (hk.contains("max_order")) {
      cfg.hk.max_order = static_cast<int>(read_integer(hk.at("max_order"), "hk.max_order"));
    }
    if (hk.contains("window")) {
      cfg.hk.window = static_cast<int>(read_integer(hk.at("window"), "hk.window"));
    }
  }
  if (j.contains("verify")) {
    const json& v = j.at("verify");
    if (!v.is_object()) bad_field("verify", "must be an object");
    reject_unknown(v, {"trials", "orbits"}, "verify");
    if (v.contains("trials")) {
      cfg.verify.trials = static_cast<int>(read_integer(v.at("trials"), "verify.trials"));
    }
    if (v.contains("orbits")) {
      cfg.verify.orbits = static_cast<int>(read_integer(v.at("orbits"), "verify.orbits"));
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    throw ConfigError("config: JSON syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(column));
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig default_config(SystemKind kind) {
  ExperimentConfig cfg;
  switch (kind) {
    case SystemKind::GeneralClebsch:
    {
      ClebschParams p;
      p.a = Vec3(1.0, 2.0, 3.0);
      p.b = Vec3(-6.0, -3.0, -2.0);
      cfg.params = p;
    }
      break;
    case SystemKind::FirstClebsch:
      cfg.params = FirstClebschParams{};
      break;
    case SystemKind::SecondClebsch:
      cfg.params = SecondClebschParams{};
      break;
    case SystemKind::Kirchhoff:
      cfg.params = KirchhoffParams{};
      break;
    case SystemKind::Lagrange:
      cfg.params = LagrangeParams{};
      break;
    case SystemKind::PlanarFamily:
      cfg.params = PlanarFamilyParams{};
      break;
  }
  return cfg;
}

json to_json(const ExperimentConfig& c) {
  json j = {{"system", {{"kind", std::string(kind_name(c.kind()))}, {"params", params_to_json(c.params)}}},
            {"eps", c.eps},
            {"steps", c.steps},
            {"seed", c.seed},
            {"hk", {{"max_order", c.hk.max_order}, {"window", c.hk.window}}},
            {"verify", {{"trials", c.verify.trials}, {"orbits", c.verify.orbits}}}};
  if (c.x0) j["x0"] = vec_json(*c.x0);
  return j;
}

State initial_state(const System& sys, const ExperimentConfig& config) {
  if (config.x0) return *config.x0;
  std::mt19937_64 rng = trial_rng(config.seed, 0);
  State x;
  if (!sample_regular_point(sys, config.eps, rng, x)) {
    throw SingularStep("no regular initial point found in the unit ball", 0.0);
  }
  return x;
}

std::vector<std::string> orbit_columns(const System& sys) {
  std::vector<std::string> cols{"step"};
  for (int i = 0; i < sys.dim(); ++i) cols.push_back("x" + std::to_string(i + 1));
  cols.emplace_back("Delta");
  for (const auto& name : sys.descriptor.integrals) cols.push_back(name);
  for (const auto& name : sys.descriptor.densities) cols.push_back("density_" + name);
  return cols;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void write_orbit_csv(std::ostream& os, const System& sys, const State& x0, double eps, int steps) {
  const auto cols = orbit_columns(sys);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  if (steps <= 0) return;
  if (x0.size() != sys.dim()) throw DimensionMismatch("simulate: x0 has the wrong dimension");
  const OrbitRecord orbit = iterate_orbit(sys.field, x0, eps, steps);
  const std::size_t n_integrals = cols.size() - 2 - static_cast<std::size_t>(sys.dim());
  for (std::size_t k = 0; k + 1 < orbit.size(); ++k) {
    const State& x = orbit.states[k];
    os << k;
    for (Eigen::Index i = 0; i < x.size(); ++i) os << ',' << format_double(x[i]);
    os << ',' << format_double(orbit.deltas[k]);
    std::vector<double> values(n_integrals, std::numeric_limits<double>::quiet_NaN());
    try {
      const NamedValues named =
          evaluate_integrals(sys, x, orbit.states[k + 1], eps, orbit.deltas[k]);
      for (std::size_t i = 0; i < std::min(values.size(), named.size()); ++i) {
        values[i] = named[i].second;
      }
    } catch (const DenominatorZero&) {
      // The row keeps nan for this step's integrals.
    }
    for (double v : values) os << ',' << format_double(v);
    os << '\n';
  }
}

std::vector<PropertyReport> run_verify(const System& sys, const ExperimentConfig& config) {
  SuiteOptions opts;
  opts.eps = config.eps;
  opts.steps = config.steps;
  opts.seed = config.seed;
  opts.trials = config.verify.trials;
  opts.orbits = config.verify.orbits;
  opts.max_order = config.hk.max_order;
  return run_suite(sys, opts);
}

int default_max_order(SystemKind kind) {
  switch (kind) {
    case SystemKind::GeneralClebsch:
    case SystemKind::FirstClebsch:
    case SystemKind::SecondClebsch:
      return 4;
    default:
      return 3;
  }
}

std::vector<HKScanEntry> run_hk_scan(const System& sys, const State& x0,
                                     const ExperimentConfig& config) {
  if (!sys.descriptor.wronskian_coeffs) {
    throw UnsupportedSystem("hk-scan: " + std::string(kind_name(sys.kind())) +
                            " has no Wronskian basis");
  }
  const int max_order = config.hk.max_order > 0 ? config.hk.max_order : default_max_order(sys.kind());
  const int window = config.hk.window;
  const OrbitRecord orbit = iterate_orbit(sys.field, x0, config.eps, window - 1 + max_order);
  std::vector<HKScanEntry> out;
  for (int order = 1; order <= max_order; ++order) {
    out.push_back({order, hk_nullspace(orbit, wronskian_observables(e3_wronskian_spec(order)),
                                       window, 0)});
  }
  return out;
}

json hk_scan_json(const System& sys, const State& x0, const ExperimentConfig& config,
                  const std::vector<HKScanEntry>& scans) {
  json list = json::array();
  for (const auto& s : scans) {
    json entry;
    to_json(entry, s.report);
    entry["order"] = s.order;
    list.push_back(std::move(entry));
  }
  return {{"system", std::string(kind_name(sys.kind()))},
          {"eps", config.eps},
          {"x0", vec_json(x0)},
          {"scans", std::move(list)}};
}

void write_report(std::ostream& os, const System& sys, const ExperimentConfig& config,
                  const std::vector<PropertyReport>& reports) {
  int passed = 0;
  for (const auto& r : reports) passed += r.passed ? 1 : 0;
  os << "system: " << kind_name(sys.kind()) << " (dimension " << sys.dim() << ")\n";
  os << "parameters: " << params_to_json(config.params).dump() << '\n';
  os << "eps = " << short_number(config.eps) << ", steps = " << config.steps
     << ", seed = " << config.seed << '\n';
  os << "checks passed: " << passed << " of " << reports.size() << "\n\n";
  for (const auto& r : reports) {
    os << (r.passed ? "PASS  " : "FAIL  ") << r.name << '\n';
    os << "      " << describe_check(r.name) << '\n';
    os << "      max violation " << short_number(r.max_violation) << " (tolerance "
       << short_number(r.tolerance) << "), " << r.trials - r.skipped << " of " << r.trials
       << " trials run\n";
  }
}

Command command_from_name(std::string_view name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "verify") return Command::Verify;
  if (name == "hk-scan") return Command::HKScan;
  if (name == "report") return Command::Report;
  throw ConfigError("unknown command \"" + std::string(name) + "\"");
}

int run_command(const ExperimentConfig& config, Command command,
                const std::filesystem::path& out_dir, std::ostream& log) {
  std::optional<System> built;
  try {
    validate(config);
    built = checked_system(config.params);
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const System& sys = *built;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    log << "error: cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    return kExitIO;
  }
  auto open = [&](const char* name, std::ofstream& file) {
    file.open(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!file) log << "error: cannot write " << (out_dir / name).string() << '\n';
    return static_cast<bool>(file);
  };
  auto finish = [&](std::ofstream& file, const char* name) {
    file.close();
    if (!file) {
      log << "error: failed writing " << (out_dir / name).string() << '\n';
      return kExitIO;
    }
    return kExitOk;
  };

  try {
    switch (command) {
      case Command::Simulate: {
        const State x0 = initial_state(sys, config);
        std::ofstream file;
        if (!open("orbit.csv", file)) return kExitIO;
        write_orbit_csv(file, sys, x0, config.eps, config.steps);
        return finish(file, "orbit.csv");
      }
      case Command::Verify: {
        const auto reports = run_verify(sys, config);
        std::ofstream file;
        if (!open("verify.json", file)) return kExitIO;
        file << json(reports).dump(2) << '\n';
        if (const int rc = finish(file, "verify.json"); rc != kExitOk) return rc;
        for (const auto& r : reports) {
          if (!r.passed) log << "FAIL " << r.name << " (max violation " << r.max_violation << ")\n";
        }
        return all_passed(reports) ? kExitOk : kExitCheckFailed;
      }
      case Command::HKScan: {
        const State x0 = initial_state(sys, config);
        const auto scans = run_hk_scan(sys, x0, config);
        std::ofstream file;
        if (!open("hkscan.json", file)) return kExitIO;
        file << hk_scan_json(sys, x0, config, scans).dump(2) << '\n';
        return finish(file, "hkscan.json");
      }
      case Command::Report: {
        const auto reports = run_verify(sys, config);
        std::ofstream file;
        if (!open("report.txt", file)) return kExitIO;
        write_report(file, sys, config, reports);
        if (const int rc = finish(file, "report.txt"); rc != kExitOk) return rc;
        return all_passed(reports) ? kExitOk : kExitCheckFailed;
      }
    }
  } catch (const SingularStep& e) {
    log << "error: " << e.what() << " (delta = " << e.delta() << ")\n";
    return kExitPole;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace khk
