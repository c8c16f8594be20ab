#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "evtlab/evt.hpp"
#include "evtlab/hypotheses.hpp"
#include "evtlab/maps.hpp"

namespace evtlab {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { Evt, EnMeasure, Decay, Density, Thresholds };

[[nodiscard]] std::string_view to_string(ExperimentKind kind) noexcept;
[[nodiscard]] std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) noexcept;

struct EnMeasureSpec {
  std::vector<std::uint64_t> n_list;
  ReturnHorizon horizon = ReturnHorizon::fixed(1);
  SamplingOptions sampling;
  bool product{false};
};

struct DecaySpec {
  TestFunction upsilon;
  TestFunction psi;
  std::vector<std::uint64_t> j_list;
  SamplingOptions sampling;
  double holder_exponent{1.0};
};

struct DensitySpec {
  std::vector<ProductPoint> targets;
  std::vector<double> radii;
  Ensemble ensemble;
  DensityOptions options;
};

struct ThresholdSpec {
  HypothesisParams params;
  std::optional<double> alpha_max;
  int dimension{2};
};

using ExperimentSpec =
    std::variant<std::monostate, EvtExperiment, EnMeasureSpec, DecaySpec, DensitySpec, ThresholdSpec>;

/// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
};

struct ResolvedConfig {
  ExperimentKind kind{ExperimentKind::Evt};
  std::uint64_t seed{0};
  std::string output_dir{"out"};
  std::optional<unsigned> threads;
  std::optional<SystemDescriptor> system;
  ExperimentSpec spec;
  /// Full config with every default filled in. Feeding it back through
  /// resolve_config reproduces it exactly. The output directory and thread
  /// count are not part of it, so they never change emitted files.
  nlohmann::json echo;
};

struct ConfigResult {
  std::optional<ResolvedConfig> config;
  std::vector<std::string> errors;  // every violation, prefixed with its key path

  [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

[[nodiscard]] ConfigResult resolve_config(const nlohmann::json& document,
                                          const Overrides& overrides = {});

/// Thrown when the config file cannot be read.
class ConfigReadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads and parses JSON. Throws ConfigReadError when the file is unreadable;
/// a parse error is returned as a schema error.
[[nodiscard]] ConfigResult load_config(const std::filesystem::path& path,
                                       const Overrides& overrides = {});

/// Serialises system parameters in config form (used by list-systems too).
[[nodiscard]] nlohmann::json system_to_json(const SystemParams& params);

}  // namespace evtlab
