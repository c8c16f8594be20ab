#include "evtlab/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace evtlab {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 5> kExperimentNames = {"evt", "en-measure", "decay",
                                                              "density", "thresholds"};

// Block key holding each experiment's parameters.
constexpr std::array<std::string_view, 5> kBlockNames = {"evt", "en_measure", "decay", "density",
                                                         "thresholds"};

using Errors = std::vector<std::string>;

// Walks one JSON object: reads keys with defaults, records the resolved value
// of each key in `out`, and reports keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string path, Errors& errors)
      : j_(j.is_object() ? &j : nullptr), path_(std::move(path)), errors_(&errors) {
    if (!j.is_object()) error("", "expected an object");
  }

  json out = json::object();

  [[nodiscard]] bool has(const char* key) const {
    return j_ != nullptr && j_->contains(key) && !(*j_)[key].is_null();
  }

  const json* raw(const char* key) {
    used_.insert(key);
    if (!has(key)) return nullptr;
    return &(*j_)[key];
  }

  double number(const char* key, double def) {
    const auto v = opt_number(key);
    const double r = v.value_or(def);
    out[key] = r;
    return r;
  }

  std::optional<double> opt_number(const char* key) {
    const json* v = raw(key);
    out[key] = nullptr;
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) {
      error(key, "expected a number");
      return std::nullopt;
    }
    const double r = v->get<double>();
    if (!std::isfinite(r)) {
      error(key, "expected a finite number");
      return std::nullopt;
    }
    out[key] = r;
    return r;
  }

  std::uint64_t uint(const char* key, std::uint64_t def) {
    const auto v = opt_uint(key);
    const std::uint64_t r = v.value_or(def);
    out[key] = r;
    return r;
  }

  std::optional<std::uint64_t> opt_uint(const char* key) {
    const json* v = raw(key);
    out[key] = nullptr;
    if (v == nullptr) return std::nullopt;
    const auto r = as_uint(*v, key);
    if (r) out[key] = *r;
    return r;
  }

  bool boolean(const char* key, bool def) {
    const json* v = raw(key);
    bool r = def;
    if (v != nullptr) {
      if (v->is_boolean()) {
        r = v->get<bool>();
      } else {
        error(key, "expected true or false");
      }
    }
    out[key] = r;
    return r;
  }

  std::string string(const char* key, const std::string& def) {
    const json* v = raw(key);
    std::string r = def;
    if (v != nullptr) {
      if (v->is_string()) {
        r = v->get<std::string>();
      } else {
        error(key, "expected a string");
      }
    }
    out[key] = r;
    return r;
  }

  std::vector<double> numbers(const char* key, std::vector<double> def) {
    const json* v = raw(key);
    std::vector<double> r = std::move(def);
    if (v != nullptr) r = number_list(*v, key);
    out[key] = r;
    return r;
  }

  std::vector<std::uint64_t> uints(const char* key, std::vector<std::uint64_t> def) {
    const json* v = raw(key);
    std::vector<std::uint64_t> r = std::move(def);
    if (v != nullptr) {
      r.clear();
      if (!v->is_array()) {
        error(key, "expected a list of non-negative integers");
      } else {
        for (const auto& x : *v) {
          if (const auto u = as_uint(x, key)) r.push_back(*u);
        }
      }
    }
    out[key] = r;
    return r;
  }

  std::vector<double> number_list(const json& v, const char* key) {
    std::vector<double> r;
    if (!v.is_array()) {
      error(key, "expected a list of numbers");
      return r;
    }
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        error(key, "expected a list of finite numbers");
        return {};
      }
      r.push_back(x.get<double>());
    }
    return r;
  }

  [[nodiscard]] std::string child_path(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void error(std::string_view key, std::string_view message) {
    const std::string where =
        key.empty() ? path_ : (path_.empty() ? std::string(key) : path_ + "." + std::string(key));
    errors_->push_back(fmt::format("{}: {}", where.empty() ? "config" : where, message));
  }

  void finish() {
    if (j_ == nullptr) return;
    for (const auto& [k, v] : j_->items()) {
      if (!used_.count(k)) error(k, "unknown key");
    }
  }

  [[nodiscard]] Errors& errors() { return *errors_; }

 private:
  std::optional<std::uint64_t> as_uint(const json& v, const char* key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d < 1.8e19 && d == std::floor(d)) return static_cast<std::uint64_t>(d);
    }
    error(key, "expected a non-negative integer");
    return std::nullopt;
  }

  const json* j_;
  std::string path_;
  Errors* errors_;
  std::set<std::string, std::less<>> used_;
};

std::optional<BaseMapParams> parse_base(Reader& r, MapKind kind) {
  switch (kind) {
    case MapKind::LinearExpanding:
      return LinearExpandingParams{r.uint("multiplier", 2)};
    case MapKind::PiecewiseC2: {
      PiecewiseC2Params p;
      p.breakpoints = r.numbers("breakpoints", p.breakpoints);
      p.distortion = r.number("distortion", p.distortion);
      p.alternating = r.boolean("alternating", p.alternating);
      return p;
    }
    case MapKind::Lsv:
      return LsvParams{r.number("omega", 0.5)};
    default:
      return std::nullopt;
  }
}

std::optional<CocycleSpec> parse_cocycle(Reader& r) {
  const std::string form = r.string("form", "linear");
  const double holder = r.number("holder_exponent", 1.0);
  if (form == "linear") return CocycleSpec::linear(r.number("slope", 1.0), holder);
  if (form == "trigonometric") {
    return CocycleSpec::trigonometric(r.number("amplitude", 0.3), holder);
  }
  if (form == "table") {
    if (!r.has("values")) r.error("values", "required for a table cocycle");
    return CocycleSpec::table(r.numbers("values", {}), holder);
  }
  r.error("form", fmt::format("unknown cocycle form '{}' (linear, trigonometric, table)", form));
  return std::nullopt;
}

std::optional<MapKind> read_map_kind(Reader& r) {
  if (!r.has("map")) {
    r.error("map", "required");
    r.raw("map");
    return std::nullopt;
  }
  const std::string name = r.string("map", "");
  const auto kind = parse_map_kind(name);
  if (!kind) r.error("map", fmt::format("unknown map '{}'", name));
  return kind;
}

std::optional<SystemParams> parse_system(const json& j, const std::string& path, Errors& errors,
                                         json& echo) {
  Reader r(j, path, errors);
  std::optional<SystemParams> params;
  const auto kind = read_map_kind(r);
  if (kind) {
    switch (*kind) {
      case MapKind::LinearExpanding:
      case MapKind::PiecewiseC2:
      case MapKind::Lsv:
        if (auto base = parse_base(r, *kind)) {
          params = std::visit([](const auto& b) { return SystemParams{b}; }, *base);
        }
        break;
      case MapKind::CircleExtension: {
        std::optional<BaseMapParams> base;
        if (const json* b = r.raw("base")) {
          Reader br(*b, r.child_path("base"), errors);
          const auto bk = read_map_kind(br);
          if (bk) {
            base = parse_base(br, *bk);
            if (!base) br.error("map", "a circle extension needs a linear-expanding, piecewise-c2 or lsv base");
          }
          br.finish();
          r.out["base"] = br.out;
        } else {
          Reader br(json::object(), r.child_path("base"), errors);
          br.out["map"] = "linear-expanding";
          base = parse_base(br, MapKind::LinearExpanding);
          r.out["base"] = br.out;
        }
        std::optional<CocycleSpec> cocycle;
        {
          const json* c = r.raw("cocycle");
          const json empty = json::object();
          Reader cr(c != nullptr ? *c : empty, r.child_path("cocycle"), errors);
          cocycle = parse_cocycle(cr);
          cr.finish();
          r.out["cocycle"] = cr.out;
        }
        if (base && cocycle) params = CircleExtensionParams{*base, *cocycle};
        break;
      }
      case MapKind::Gouezel: {
        const std::string profile = r.string("profile", "cosine");
        const double amin = r.number("alpha_min", 0.10);
        const double amax = r.number("alpha_max", 0.14);
        if (profile != "cosine") {
          r.error("profile", fmt::format("unknown alpha profile '{}' (only cosine can be validated)",
                                         profile));
          break;
        }
        const auto bad = AlphaProfile::violations(amin, amax);
        for (const auto& b : bad) r.error("", "alpha profile violates " + b);
        if (bad.empty()) params = GouezelParams{AlphaProfile::cosine(amin, amax)};
        break;
      }
      case MapKind::Viana: {
        VianaParams p;
        p.multiplier = r.uint("multiplier", p.multiplier);
        p.a0 = r.number("a0", p.a0);
        p.alpha = r.number("alpha", p.alpha);
        const std::string forcing = r.string("forcing", "sin");
        if (forcing == "cos") {
          p.forcing = VianaForcing::Cos;
        } else if (forcing != "sin") {
          r.error("forcing", fmt::format("unknown forcing '{}' (sin, cos)", forcing));
        }
        const auto trap = r.numbers("trap", {p.trap_lo, p.trap_hi});
        if (trap.size() == 2) {
          p.trap_lo = trap[0];
          p.trap_hi = trap[1];
        } else {
          r.error("trap", "expected [lo, hi]");
        }
        params = p;
        break;
      }
    }
  }
  r.finish();
  echo = r.out;
  if (params) {
    const auto bad = validate(*params);
    for (const auto& b : bad) errors.push_back(fmt::format("{}: {}", path, b));
    if (!bad.empty()) return std::nullopt;
  }
  return params;
}

std::optional<ProductPoint> parse_point(const json& j, const std::string& path,
                                        const Geometry& geometry, Errors& errors, json& echo) {
  Reader r(j, path, errors);
  const auto base = r.numbers("base", {});
  const auto fiber = r.numbers("fiber", {});
  r.finish();
  echo = r.out;
  try {
    ProductPoint p = make_point(geometry, base, fiber);
    if (!geometry.contains(p)) {
      errors.push_back(fmt::format("{}: point lies outside the phase space", path));
      return std::nullopt;
    }
    return p;
  } catch (const std::invalid_argument& e) {
    errors.push_back(fmt::format("{}: {}", path, e.what()));
    return std::nullopt;
  }
}

std::vector<double> parse_v_grid(Reader& r) {
  const json* v = r.raw("v_grid");
  std::vector<double> grid;
  if (v == nullptr) {
    for (int i = 0; i <= 8; ++i) grid.push_back(-1.0 + 0.5 * i);
  } else if (v->is_object()) {
    Reader g(*v, r.child_path("v_grid"), r.errors());
    const double start = g.number("start", -1.0);
    const double stop = g.number("stop", 3.0);
    const double step = g.number("step", 0.5);
    g.finish();
    if (!(step > 0.0) || stop < start) {
      g.error("", "needs step > 0 and stop >= start");
    } else {
      const auto count = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
      if (count > 100000) {
        g.error("", "more than 100000 grid points");
      } else {
        for (std::int64_t i = 0; i < count; ++i) grid.push_back(start + step * static_cast<double>(i));
      }
    }
  } else {
    grid = r.number_list(*v, "v_grid");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      r.error("v_grid", "must be strictly increasing");
      break;
    }
  }
  if (grid.empty()) r.error("v_grid", "must not be empty");
  r.out["v_grid"] = grid;
  return grid;
}

void check_radii_into(Reader& r, const std::vector<double>& radii) {
  try {
    check_radii(radii);
  } catch (const std::invalid_argument& e) {
    r.error("radii", e.what());
  }
}

FitRange parse_fit(Reader& parent) {
  FitRange fit;
  const json* f = parent.raw("fit");
  const json empty = json::object();
  Reader r(f != nullptr ? *f : empty, parent.child_path("fit"), parent.errors());
  fit.lo = r.number("lo", 0.0);
  if (const auto hi = r.opt_number("hi")) fit.hi = *hi;
  r.finish();
  if (!(fit.hi >= fit.lo)) r.error("", "needs hi >= lo");
  parent.out["fit"] = r.out;
  return fit;
}

SamplingOptions parse_sampling(Reader& r, std::uint64_t seed, std::uint64_t default_samples) {
  SamplingOptions s;
  s.samples = r.uint("samples", default_samples);
  if (s.samples < 1) r.error("samples", "must be >= 1");
  s.burn_in = r.opt_uint("burn_in");
  s.seed = seed;
  s.fit = parse_fit(r);
  return s;
}

std::optional<TestFunction> parse_test_function(const json* j, const std::string& path,
                                                const Geometry& geometry, Errors& errors,
                                                json& echo, std::string_view def) {
  const json empty = json::object();
  Reader r(j != nullptr ? *j : empty, path, errors);
  const std::string name = r.string("kind", std::string(def));
  std::optional<TestFunction> f;
  const auto kind = evtlab::parse_test_function(name);
  if (!kind) {
    r.error("kind", fmt::format("unknown test function '{}' (cos, sin, sawtooth, bump, constant)",
                                name));
  } else {
    switch (*kind) {
      case TestFunction::Kind::Cos:
      case TestFunction::Kind::Sin: {
        const auto axis = r.uint("axis", 0);
        const auto freq = r.uint("frequency", 1);
        if (freq < 1 || freq > 1'000'000) r.error("frequency", "must be in 1..1000000");
        f = *kind == TestFunction::Kind::Cos ? TestFunction::cosine(axis, static_cast<int>(freq))
                                             : TestFunction::sine(axis, static_cast<int>(freq));
        break;
      }
      case TestFunction::Kind::Sawtooth:
        f = TestFunction::sawtooth(r.uint("axis", 0));
        break;
      case TestFunction::Kind::Bump: {
        if (!r.has("center")) r.error("center", "required for a bump");
        auto center = r.numbers("center", {});
        f = TestFunction::bump(std::move(center), r.number("width", 0.1));
        break;
      }
      case TestFunction::Kind::Constant:
        f = TestFunction::constant(r.number("value", 1.0));
        break;
    }
  }
  r.finish();
  echo = r.out;
  if (f) {
    try {
      check_test_function(*f, geometry);
    } catch (const std::invalid_argument& e) {
      errors.push_back(fmt::format("{}: {}", path, e.what()));
      return std::nullopt;
    }
  }
  return f;
}

ExperimentSpec parse_evt(Reader& r, const SystemDescriptor& system, std::uint64_t seed) {
  EvtExperiment e{system};
  e.n = r.uint("n", 10'000);
  e.ensemble.count = r.uint("ensemble", 1'000);
  e.ensemble.seed = seed;
  e.burn_in = r.uint("burn_in", system.default_burn_in());
  e.v_grid = parse_v_grid(r);
  e.radii = r.numbers("radii", {0.05, 0.02, 0.01});
  check_radii_into(r, e.radii);
  if (const json* t = r.raw("target")) {
    json echo;
    e.target = parse_point(*t, r.child_path("target"), system.geometry(), r.errors(), echo);
    r.out["target"] = echo;
  } else {
    r.out["target"] = nullptr;
  }
  if (const json* pts = r.raw("start_points")) {
    json echo = json::array();
    if (!pts->is_array() || pts->empty()) {
      r.error("start_points", "expected a non-empty list of points");
    } else {
      e.ensemble.mode = SamplingMode::Explicit;
      e.ensemble.points.clear();
      for (std::size_t i = 0; i < pts->size(); ++i) {
        json pe;
        auto p = parse_point((*pts)[i], fmt::format("{}[{}]", r.child_path("start_points"), i),
                             system.geometry(), r.errors(), pe);
        echo.push_back(pe);
        if (p) e.ensemble.points.push_back(*p);
      }
      if (r.has("ensemble") && e.ensemble.count != pts->size()) {
        r.error("ensemble", "must equal the number of start_points");
      }
      e.ensemble.count = e.ensemble.points.size();
      r.out["ensemble"] = e.ensemble.count;
    }
    r.out["start_points"] = echo;
  } else {
    r.out["start_points"] = nullptr;
  }
  if (e.ensemble.count < 1) r.error("ensemble", "must be >= 1");
  if (const json* s = r.raw("short_range")) {
    Reader sr(*s, r.child_path("short_range"), r.errors());
    ShortRangeRequest req;
    req.gamma_prime = sr.number("gamma_prime", 0.4);
    req.v = sr.number("v", 0.0);
    req.return_starts = sr.uint("return_starts", 0);
    sr.finish();
    if (!(req.gamma_prime > 0.0)) sr.error("gamma_prime", "must be positive");
    e.short_range = req;
    r.out["short_range"] = sr.out;
  } else {
    r.out["short_range"] = nullptr;
  }
  e.short_return_steps = r.uint("short_return_steps", 20);
  return e;
}

ExperimentSpec parse_en_measure(Reader& r, const SystemDescriptor& system, std::uint64_t seed) {
  EnMeasureSpec s;
  s.n_list = r.uints("n_list", {10, 100, 1000, 10000});
  if (s.n_list.empty()) r.error("n_list", "must not be empty");
  for (auto n : s.n_list) {
    if (n < 1) r.error("n_list", "values must be >= 1");
  }
  const double gamma = r.number("gamma_prime", 0.2);
  const auto dim = r.uint("dimension", static_cast<std::uint64_t>(system.dimension()));
  const auto fixed = r.opt_uint("horizon");
  if (fixed) {
    if (*fixed < 1) {
      r.error("horizon", "must be >= 1");
    } else {
      s.horizon = ReturnHorizon::fixed(*fixed);
    }
  } else if (!(gamma > 0.0) || dim < 1 || dim > 64) {
    r.error("gamma_prime", "needs gamma_prime > 0 and 1 <= dimension <= 64");
  } else {
    s.horizon = ReturnHorizon::power(gamma, static_cast<int>(dim));
  }
  s.sampling = parse_sampling(r, seed, 100'000);
  s.product = r.boolean("product", false);
  if (s.product && system.fiber_dimension() == 0) {
    r.error("product", "needs a system with a fiber");
  }
  return s;
}

ExperimentSpec parse_decay(Reader& r, const SystemDescriptor& system, std::uint64_t seed) {
  DecaySpec s;
  json ue;
  json pe;
  auto up = parse_test_function(r.raw("upsilon"), r.child_path("upsilon"), system.geometry(),
                                r.errors(), ue, "cos");
  auto ps = parse_test_function(r.raw("psi"), r.child_path("psi"), system.geometry(), r.errors(),
                                pe, "cos");
  r.out["upsilon"] = ue;
  r.out["psi"] = pe;
  if (up) s.upsilon = *up;
  if (ps) s.psi = *ps;
  s.j_list = r.uints("j_list", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  if (s.j_list.empty()) r.error("j_list", "must not be empty");
  s.sampling = parse_sampling(r, seed, 100'000);
  s.holder_exponent = r.number("holder_exponent", 1.0);
  if (!(s.holder_exponent > 0.0 && s.holder_exponent <= 1.0)) {
    r.error("holder_exponent", "must lie in (0, 1]");
  }
  return s;
}

ExperimentSpec parse_density(Reader& r, const SystemDescriptor& system, std::uint64_t seed) {
  DensitySpec s;
  json echo = json::array();
  if (const json* t = r.raw("targets"); t != nullptr && t->is_array() && !t->empty()) {
    for (std::size_t i = 0; i < t->size(); ++i) {
      json pe;
      auto p = parse_point((*t)[i], fmt::format("{}[{}]", r.child_path("targets"), i),
                           system.geometry(), r.errors(), pe);
      echo.push_back(pe);
      if (p) s.targets.push_back(*p);
    }
  } else {
    r.error("targets", "required: a non-empty list of points");
  }
  r.out["targets"] = echo;
  s.radii = r.numbers("radii", {0.01, 0.005, 0.002});
  check_radii_into(r, s.radii);
  s.ensemble.count = r.uint("ensemble", 10'000);
  if (s.ensemble.count < 1) r.error("ensemble", "must be >= 1");
  s.ensemble.seed = seed;
  s.options.burn_in = r.uint("burn_in", system.default_burn_in());
  s.options.window = r.uint("window", 1);
  if (s.options.window < 1) r.error("window", "must be >= 1");
  return s;
}

ExperimentSpec parse_thresholds(Reader& r, const std::optional<SystemDescriptor>& system) {
  ThresholdSpec s;
  s.params.beta = r.opt_number("beta");
  s.params.gamma_prime = r.opt_number("gamma_prime");
  s.params.alpha = r.opt_number("alpha");
  s.params.holder_exponent = r.opt_number("holder_exponent");
  s.params.delta = r.opt_number("delta");
  s.params.kappa = r.opt_number("kappa");
  s.alpha_max = r.opt_number("alpha_max");
  const auto dim = r.uint("dimension", system ? static_cast<std::uint64_t>(system->dimension()) : 2);
  if (dim < 1 || dim > 64) r.error("dimension", "must be in 1..64");
  s.dimension = static_cast<int>(std::clamp<std::uint64_t>(dim, 1, 64));
  for (const auto& v : validate(s.params, s.dimension)) r.error("", v);
  if (!s.params.gamma_prime) r.error("gamma_prime", "required");
  if (!s.params.kappa && !s.params.delta) r.error("kappa", "kappa or delta is required");
  if (s.alpha_max && !(*s.alpha_max > 0.0 && *s.alpha_max < 1.0)) {
    r.error("alpha_max", "must lie in (0, 1)");
  }
  return s;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
  return kExperimentNames[static_cast<std::size_t>(kind)];
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kExperimentNames.size(); ++i) {
    if (kExperimentNames[i] == name) return static_cast<ExperimentKind>(i);
  }
  return std::nullopt;
}

ConfigResult resolve_config(const json& document, const Overrides& overrides) {
  ConfigResult result;
  Errors& errors = result.errors;
  Reader top(document, "", errors);
  if (!document.is_object()) return result;

  ResolvedConfig cfg;
  std::optional<ExperimentKind> kind;
  if (!top.has("experiment")) {
    top.error("experiment", "required (evt, en-measure, decay, density, thresholds)");
    top.raw("experiment");
  } else {
    const std::string name = top.string("experiment", "");
    kind = parse_experiment_kind(name);
    if (!kind) top.error("experiment", fmt::format("unknown experiment '{}'", name));
  }
  cfg.seed = top.uint("seed", 0);
  if (overrides.seed) cfg.seed = *overrides.seed;
  top.out["seed"] = cfg.seed;
  cfg.output_dir = top.string("output_dir", "out");
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  top.out.erase("output_dir");
  if (const json* v = top.raw("schema_version"); v != nullptr && *v != kSchemaVersion) {
    top.error("schema_version", fmt::format("unsupported (this build reads {})", kSchemaVersion));
  }
  // Command-line knob; accepted in files, never echoed.
  if (const json* t = top.raw("threads"); t != nullptr && !t->is_number_unsigned()) {
    top.error("threads", "expected a positive integer");
  } else if (t != nullptr) {
    cfg.threads = static_cast<unsigned>(std::clamp<std::uint64_t>(t->get<std::uint64_t>(), 1, 1024));
  }

  if (const json* s = top.raw("system")) {
    json echo;
    if (auto params = parse_system(*s, "system", errors, echo)) cfg.system.emplace(*params);
    top.out["system"] = echo;
  } else if (!kind || *kind != ExperimentKind::Thresholds) {
    top.error("system", "required");
  }

  for (std::size_t i = 0; i < kBlockNames.size(); ++i) {
    const bool mine = kind && static_cast<std::size_t>(*kind) == i;
    const char* name = kBlockNames[i].data();
    if (!mine) {
      if (top.has(name)) top.error(name, "block does not belong to this experiment");
      top.raw(name);
      continue;
    }
    const json* b = top.raw(name);
    const json empty = json::object();
    Reader r(b != nullptr ? *b : empty, name, errors);
    if (*kind == ExperimentKind::Thresholds) {
      cfg.spec = parse_thresholds(r, cfg.system);
    } else if (cfg.system) {
      switch (*kind) {
        case ExperimentKind::Evt:
          cfg.spec = parse_evt(r, *cfg.system, cfg.seed);
          break;
        case ExperimentKind::EnMeasure:
          cfg.spec = parse_en_measure(r, *cfg.system, cfg.seed);
          break;
        case ExperimentKind::Decay:
          cfg.spec = parse_decay(r, *cfg.system, cfg.seed);
          break;
        case ExperimentKind::Density:
          cfg.spec = parse_density(r, *cfg.system, cfg.seed);
          break;
        case ExperimentKind::Thresholds:
          break;
      }
    } else {
      // Without a valid system the block cannot be resolved; still reject
      // unknown keys so every problem is listed at once.
      continue;
    }
    r.finish();
    top.out[name] = r.out;
  }
  top.finish();

  if (!errors.empty() || !kind) return result;
  cfg.kind = *kind;
  top.out["schema_version"] = kSchemaVersion;
  cfg.echo = top.out;
  result.config = std::move(cfg);
  return result;
}

ConfigResult load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigReadError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ConfigReadError(fmt::format("error reading '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    ConfigResult r;
    r.errors.push_back(fmt::format("config: invalid JSON: {}", e.what()));
    return r;
  }
  return resolve_config(doc, overrides);
}

json system_to_json(const SystemParams& params) {
  auto base_json = [](const BaseMapParams& b) {
    return std::visit(
        [](const auto& p) -> json {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, LinearExpandingParams>) {
            return {{"map", "linear-expanding"}, {"multiplier", p.multiplier}};
          } else if constexpr (std::is_same_v<T, PiecewiseC2Params>) {
            return {{"map", "piecewise-c2"},
                    {"breakpoints", p.breakpoints},
                    {"distortion", p.distortion},
                    {"alternating", p.alternating}};
          } else {
            return {{"map", "lsv"}, {"omega", p.omega}};
          }
        },
        b);
  };
  return std::visit(
      [&](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CircleExtensionParams>) {
          json c;
          switch (p.cocycle.form()) {
            case CocycleSpec::Form::Linear:
              c = {{"form", "linear"}, {"slope", p.cocycle.coefficient()}};
              break;
            case CocycleSpec::Form::Trigonometric:
              c = {{"form", "trigonometric"}, {"amplitude", p.cocycle.coefficient()}};
              break;
            case CocycleSpec::Form::Table:
              c = {{"form", "table"}, {"values", p.cocycle.values()}};
              break;
          }
          c["holder_exponent"] = p.cocycle.holder_exponent();
          return {{"map", "circle-extension"}, {"base", base_json(p.base)}, {"cocycle", c}};
        } else if constexpr (std::is_same_v<T, GouezelParams>) {
          return {{"map", "gouezel"},
                  {"profile", "cosine"},
                  {"alpha_min", p.profile.alpha_min()},
                  {"alpha_max", p.profile.alpha_max()}};
        } else if constexpr (std::is_same_v<T, VianaParams>) {
          return {{"map", "viana"},
                  {"multiplier", p.multiplier},
                  {"a0", p.a0},
                  {"alpha", p.alpha},
                  {"forcing", p.forcing == VianaForcing::Sin ? "sin" : "cos"},
                  {"trap", {p.trap_lo, p.trap_hi}}};
        } else {
          return base_json(BaseMapParams{p});
        }
      },
      params);
}

}  // namespace evtlab
