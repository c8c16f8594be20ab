#include "evtlab/run.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <thread>

namespace evtlab {

using nlohmann::json;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

// JSON has no infinities; they become null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  out.flush();
  if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
  written.push_back(path);
}

json error_record(std::string_view kind, int code, std::string_view message,
                  const std::vector<std::string>& violations = {}) {
  json e = {{"schema_version", kSchemaVersion},
            {"error", kind},
            {"exit_code", code},
            {"message", message}};
  if (!violations.empty()) e["violations"] = violations;
  return e;
}

json verdict(std::optional<double> beta_hat, std::optional<double> alpha_hat,
             std::optional<double> threshold, std::optional<bool> satisfied) {
  return {{"beta_hat", opt(beta_hat)},
          {"alpha_hat", opt(alpha_hat)},
          {"threshold", opt(threshold)},
          {"satisfied", satisfied ? json(*satisfied) : json(nullptr)}};
}

json fit_json(const PowerFit& fit) {
  return {{"exponent", opt(fit.exponent)},
          {"intercept", fit.intercept},
          {"points", fit.points},
          {"range", {{"lo", fit.range.lo}, {"hi", finite_or_null(fit.range.hi)}}}};
}

json density_json(const DensityEstimate& d) {
  json rows = json::array();
  for (const auto& r : d.rows) {
    rows.push_back({{"radius", r.radius},
                    {"volume", r.volume},
                    {"visits", r.visits},
                    {"mass", r.mass},
                    {"estimate", r.estimate},
                    {"stderr", r.error}});
  }
  return {{"H_hat", d.H_hat},
          {"H_hat_stderr", d.H_hat_error},
          {"H_hat_radius", d.H_hat_radius},
          {"rows", rows},
          {"warnings", d.warnings}};
}

std::string csv_header(std::initializer_list<std::string_view> cols) {
  std::string out;
  for (auto c : cols) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out + '\n';
}

struct Emitted {
  std::string csv;
  json results;
  json verdict;
  std::vector<std::string> warnings;
  std::optional<std::pair<std::string, std::string>> extra;  // suffix, csv
};

Emitted run_evt(const EvtExperiment& e, const Exec& exec) {
  const EvtResult r = empirical_evt_cdf(e, exec);
  Emitted out;
  out.csv = evt_csv(r);
  json sr = nullptr;
  if (r.short_range) {
    const auto& s = *r.short_range;
    sr = {{"statistic", s.statistic},     {"radius", s.radius},
          {"horizon", s.horizon},         {"ball_mass", s.ball_mass},
          {"ball_visits", s.ball_visits}, {"mean_returns", s.mean_returns},
          {"starts", s.starts}};
  }
  out.results = {{"ks_distance", r.ks_distance},
                 {"ks_distance_unit_constant", r.ks_distance_unit_constant},
                 {"H_hat", r.density.H_hat},
                 {"H_hat_stderr", r.density.H_hat_error},
                 {"H_hat_radius", r.density.H_hat_radius},
                 {"unit_ball_volume", unit_ball_volume(r.dimension)},
                 {"dimension", r.dimension},
                 {"burn_in", r.burn_in},
                 {"members_used", r.members_used},
                 {"diverged_count", r.diverged},
                 {"target", point_to_json(r.target)},
                 {"density", density_json(r.density)},
                 {"short_range", sr}};
  out.verdict = nullptr;
  out.warnings = r.warnings;
  return out;
}

Emitted run_en_measure(const SystemDescriptor& system, const EnMeasureSpec& s, const Exec& exec) {
  const auto report = estimate_en_measure(system, s.n_list, s.horizon, s.sampling, exec);
  Emitted out;
  out.csv = en_measure_csv(report);
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"n", row.n},
                    {"horizon", row.horizon},
                    {"hits", row.hits},
                    {"value", row.measure},
                    {"stderr", row.error},
                    {"upper_bound", row.upper_bound}});
  }
  out.results = {{"rows", rows},
                 {"beta_fit", fit_json(report.beta)},
                 {"samples", report.samples},
                 {"burn_in", report.burn_in},
                 {"uniform_sampling", report.uniform_sampling}};
  std::optional<double> threshold;
  std::optional<bool> satisfied;
  if (!s.horizon.is_fixed()) {
    // Condition gamma' < beta / D, read as beta > D gamma'.
    threshold = s.horizon.dimension() * s.horizon.gamma_prime();
    if (report.beta.exponent) satisfied = *report.beta.exponent > *threshold;
  }
  out.verdict = verdict(report.beta.exponent, std::nullopt, threshold, satisfied);
  for (const auto& row : report.rows) {
    if (row.hits == 0) {
      out.warnings.push_back(fmt::format(
          "no hits at n = {}; measure reported as 0 (95% upper bound {}), excluded from the fit",
          row.n, row.upper_bound));
    }
  }
  if (s.product) {
    const auto prod = estimate_product_en_measure(system, s.n_list, s.horizon, s.sampling, exec);
    out.extra = std::pair{std::string("_product"), product_en_csv(prod)};
    json prows = json::array();
    for (const auto& row : prod.rows) {
      prows.push_back({{"n", row.n},
                       {"horizon", row.horizon},
                       {"value", row.product_measure},
                       {"stderr", row.product_error},
                       {"base_value", row.base_measure},
                       {"base_stderr", row.base_error}});
    }
    out.results["product"] = {{"rows", prows},
                              {"samples", prod.samples},
                              {"burn_in", prod.burn_in},
                              {"inclusion_checks", prod.inclusion_checks},
                              {"inclusion_violations", 0}};
  }
  return out;
}

Emitted run_decay(const SystemDescriptor& system, const DecaySpec& s, const Exec& exec) {
  const auto report = estimate_correlation_decay(system, s.upsilon, s.psi, s.j_list, s.sampling,
                                                 s.holder_exponent, exec);
  Emitted out;
  out.csv = decay_csv(report);
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"j", row.j},
                    {"covariance", row.covariance},
                    {"value", row.value},
                    {"stderr", row.error}});
  }
  out.results = {{"rows", rows},
                 {"alpha_fit", fit_json(report.alpha)},
                 {"psi_sup_norm", report.psi_sup},
                 {"upsilon_holder_norm", opt(report.upsilon_holder)},
                 {"holder_exponent", report.holder_exponent},
                 {"samples", report.samples},
                 {"burn_in", report.burn_in}};
  out.verdict = verdict(std::nullopt, report.alpha.exponent, std::nullopt, std::nullopt);
  if (!report.upsilon_holder) {
    out.warnings.emplace_back("upsilon is not Holder continuous on this phase space");
  }
  return out;
}

Emitted run_density(const SystemDescriptor& system, const DensitySpec& s, const Exec& exec) {
  const auto est = density_profile(system, s.ensemble, s.targets, s.radii, s.options, exec);
  Emitted out;
  out.csv = density_csv(s.targets, est);
  json targets = json::array();
  for (std::size_t t = 0; t < est.size(); ++t) {
    json d = density_json(est[t]);
    d["target"] = point_to_json(s.targets[t]);
    targets.push_back(d);
    for (const auto& w : est[t].warnings) {
      out.warnings.push_back(fmt::format("target {}: {}", t, w));
    }
  }
  out.results = {{"targets", targets},
                 {"ensemble", s.ensemble.count},
                 {"burn_in", s.options.burn_in},
                 {"window", s.options.window}};
  out.verdict = nullptr;
  return out;
}

Emitted run_thresholds(const ThresholdSpec& s) {
  Emitted out;
  const auto cond = check_exponent_condition(s.params, s.dimension);
  std::string csv = csv_header({"quantity", "value"});
  csv += fmt::format("exponent_threshold,{}\n", format_number(cond.threshold));
  csv += fmt::format("exponent_satisfied,{}\n", cond.satisfied ? 1 : 0);
  out.results = {{"exponent_threshold", cond.threshold},
                 {"exponent_satisfied", cond.satisfied},
                 {"dimension", s.dimension}};
  if (s.alpha_max) {
    const double g = *s.params.gamma_prime;
    const auto gz = check_gouezel_alpha_condition(*s.alpha_max, g, s.dimension);
    csv += fmt::format("gouezel_bound,{}\n", format_number(gz.threshold));
    csv += fmt::format("gouezel_satisfied,{}\n", gz.satisfied ? 1 : 0);
    out.results["gouezel_bound"] = gz.threshold;
    out.results["gouezel_satisfied"] = gz.satisfied;
  }
  out.csv = csv;
  out.verdict = verdict(s.params.beta, s.params.alpha, cond.threshold,
                        s.params.alpha ? std::optional<bool>(cond.satisfied) : std::nullopt);
  if (!s.params.alpha) out.warnings.emplace_back("alpha not given; the condition is not decided");
  return out;
}

}  // namespace

unsigned default_threads() noexcept { return std::max(1U, std::thread::hardware_concurrency()); }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

json point_to_json(const ProductPoint& p) {
  json base = json::array();
  json fiber = json::array();
  for (const auto& c : p.base) base.push_back(coordinate_value(c));
  for (const auto& c : p.fiber) fiber.push_back(coordinate_value(c));
  return {{"base", base}, {"fiber", fiber}};
}

std::string evt_csv(const EvtResult& result) {
  std::string out = csv_header({"v", "u_n", "empirical_cdf", "theoretical_cdf", "abs_diff"});
  for (const auto& r : result.rows) {
    out += fmt::format("{},{},{},{},{}\n", format_number(r.v), format_number(r.u_n),
                       format_number(r.empirical), format_number(r.theoretical),
                       format_number(std::abs(r.empirical - r.theoretical)));
  }
  return out;
}

std::string en_measure_csv(const EnMeasureReport& report) {
  std::string out = csv_header({"n", "value", "stderr"});
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{}\n", r.n, format_number(r.measure), format_number(r.error));
  }
  return out;
}

std::string product_en_csv(const ProductEnReport& report) {
  std::string out = csv_header({"n", "value", "stderr", "base_value", "base_stderr"});
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{}\n", r.n, format_number(r.product_measure),
                       format_number(r.product_error), format_number(r.base_measure),
                       format_number(r.base_error));
  }
  return out;
}

std::string decay_csv(const DecayReport& report) {
  std::string out = csv_header({"j", "value", "stderr"});
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{}\n", r.j, format_number(r.value), format_number(r.error));
  }
  return out;
}

std::string density_csv(const std::vector<ProductPoint>& targets,
                        const std::vector<DensityEstimate>& estimates) {
  std::string out = csv_header({"target", "radius", "estimate", "stderr"});
  for (std::size_t t = 0; t < estimates.size(); ++t) {
    // Coordinates of the target joined by spaces keep the column numeric for D = 1.
    std::string label;
    auto add = [&label](const CoordVector& side) {
      for (const auto& c : side) {
        if (!label.empty()) label += ' ';
        label += format_number(coordinate_value(c));
      }
    };
    add(targets[t].base);
    add(targets[t].fiber);
    for (const auto& r : estimates[t].rows) {
      out += fmt::format("{},{},{},{}\n", label, format_number(r.radius), format_number(r.estimate),
                         format_number(r.error));
    }
  }
  return out;
}

RunOutcome run_resolved(const ResolvedConfig& config, unsigned threads) {
  RunOutcome outcome;
  try {
    const Exec exec{std::max(1U, threads)};
    Emitted em;
    switch (config.kind) {
      case ExperimentKind::Evt:
        em = run_evt(std::get<EvtExperiment>(config.spec), exec);
        break;
      case ExperimentKind::EnMeasure:
        em = run_en_measure(*config.system, std::get<EnMeasureSpec>(config.spec), exec);
        break;
      case ExperimentKind::Decay:
        em = run_decay(*config.system, std::get<DecaySpec>(config.spec), exec);
        break;
      case ExperimentKind::Density:
        em = run_density(*config.system, std::get<DensitySpec>(config.spec), exec);
        break;
      case ExperimentKind::Thresholds:
        em = run_thresholds(std::get<ThresholdSpec>(config.spec));
        break;
    }
    json summary = {{"schema_version", kSchemaVersion},
                    {"experiment", to_string(config.kind)},
                    {"seed", config.seed},
                    {"results", em.results},
                    {"warnings", em.warnings},
                    {"config", config.echo}};
    if (!em.verdict.is_null()) summary["verdict"] = em.verdict;

    const std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    const std::string stem = fmt::format("{}_seed{}", to_string(config.kind), config.seed);
    write_file(dir / (stem + ".csv"), em.csv, outcome.files);
    if (em.extra) write_file(dir / (stem + em.extra->first + ".csv"), em.extra->second, outcome.files);
    write_file(dir / (stem + ".json"), summary.dump(2) + "\n", outcome.files);
  } catch (const TooManyDiverged& e) {
    outcome.exit_code = kExitDiverged;
    outcome.error = error_record("divergence", kExitDiverged, e.what());
    outcome.error["diverged_count"] = e.diverged();
    outcome.error["ensemble"] = e.count();
  } catch (const OrbitDiverged& e) {
    outcome.exit_code = kExitDiverged;
    outcome.error = error_record("divergence", kExitDiverged, e.what());
    outcome.error["step"] = e.step();
  } catch (const IoError& e) {
    outcome.exit_code = kExitIo;
    outcome.error = error_record("io", kExitIo, e.what());
  } catch (const std::exception& e) {
    outcome.exit_code = kExitFailure;
    outcome.error = error_record("failure", kExitFailure, e.what());
  }
  return outcome;
}

RunOutcome run_experiment(const std::filesystem::path& config_path, const RunOptions& options) {
  RunOutcome outcome;
  ConfigResult loaded;
  try {
    loaded = load_config(config_path, options.overrides);
  } catch (const ConfigReadError& e) {
    outcome.exit_code = kExitIo;
    outcome.error = error_record("io", kExitIo, e.what());
    return outcome;
  } catch (const std::exception& e) {
    outcome.exit_code = kExitFailure;
    outcome.error = error_record("failure", kExitFailure, e.what());
    return outcome;
  }
  if (!loaded.ok()) {
    outcome.exit_code = kExitSchema;
    outcome.error = error_record("schema", kExitSchema, "configuration is invalid", loaded.errors);
    return outcome;
  }
  const auto& cfg = *loaded.config;
  const unsigned threads = options.threads.value_or(cfg.threads.value_or(default_threads()));
  return run_resolved(cfg, threads);
}

json validate_config(const std::filesystem::path& config_path) {
  try {
    const auto loaded = load_config(config_path);
    return {{"valid", loaded.ok()}, {"violations", loaded.errors}};
  } catch (const ConfigReadError& e) {
    return {{"valid", false}, {"violations", {std::string("config: ") + e.what()}}};
  }
}

}  // namespace evtlab
