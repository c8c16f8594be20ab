#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evtlab/config.hpp"
#include "evtlab/evt.hpp"
#include "evtlab/hypotheses.hpp"

namespace evtlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitSchema = 2,
  kExitDiverged = 3,
  kExitIo = 4,
};

struct RunOptions {
  Overrides overrides;
  std::optional<unsigned> threads;
};

struct RunOutcome {
  int exit_code{kExitOk};
  std::vector<std::filesystem::path> files;
  nlohmann::json error;  // null on success
};

/// Loads, validates and runs one experiment, writing <kind>_seed<seed>.csv
/// and .json into the output directory. Never throws; failures come back as
/// an exit code with an error record.
[[nodiscard]] RunOutcome run_experiment(const std::filesystem::path& config_path,
                                        const RunOptions& options = {});

[[nodiscard]] RunOutcome run_resolved(const ResolvedConfig& config, unsigned threads);

/// Full-precision decimal (17 significant digits); inf and nan spelled out.
[[nodiscard]] std::string format_number(double x);

[[nodiscard]] std::string evt_csv(const EvtResult& result);
[[nodiscard]] std::string en_measure_csv(const EnMeasureReport& report);
[[nodiscard]] std::string product_en_csv(const ProductEnReport& report);
[[nodiscard]] std::string decay_csv(const DecayReport& report);
[[nodiscard]] std::string density_csv(const std::vector<ProductPoint>& targets,
                                      const std::vector<DensityEstimate>& estimates);

[[nodiscard]] nlohmann::json point_to_json(const ProductPoint& p);

/// Validation report for `evtlab validate`: {valid, violations}.
[[nodiscard]] nlohmann::json validate_config(const std::filesystem::path& config_path);

[[nodiscard]] unsigned default_threads() noexcept;

}  // namespace evtlab
