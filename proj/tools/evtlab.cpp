// evtlab: run extreme-value and hypothesis experiments from JSON configs.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "evtlab/config.hpp"
#include "evtlab/run.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

evtlab::SystemParams example_params(evtlab::MapKind kind) {
  using namespace evtlab;
  switch (kind) {
    case MapKind::LinearExpanding:
      return LinearExpandingParams{};
    case MapKind::PiecewiseC2:
      return PiecewiseC2Params{};
    case MapKind::Lsv:
      return LsvParams{};
    case MapKind::CircleExtension:
      return CircleExtensionParams{};
    case MapKind::Gouezel:
      return GouezelParams{};
    case MapKind::Viana:
      return VianaParams{};
  }
  return LinearExpandingParams{};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme value laws for skew-product dynamical systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Path to the JSON config")->required();
  run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--threads", threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  run->add_option("--out-dir", out_dir, "Output directory (overrides the config)");

  auto* validate = app.add_subcommand("validate", "List every constraint a config violates");
  validate->add_option("config", config_path, "Path to the JSON config")->required();

  auto* list = app.add_subcommand("list-systems", "Show the available maps and their defaults");
  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (run->parsed()) {
    evtlab::RunOptions options;
    options.overrides.seed = seed;
    options.overrides.output_dir = out_dir;
    options.threads = threads;
    const auto outcome = evtlab::run_experiment(config_path, options);
    if (outcome.exit_code != evtlab::kExitOk) {
      std::cerr << outcome.error.dump() << '\n';
      return outcome.exit_code;
    }
    for (const auto& f : outcome.files) std::cout << f.string() << '\n';
    return 0;
  }
  if (validate->parsed()) {
    const auto report = evtlab::validate_config(config_path);
    std::cout << report.dump(2) << '\n';
    return report["valid"].get<bool>() ? 0 : evtlab::kExitSchema;
  }
  if (list->parsed()) {
    for (int k = 0; k <= static_cast<int>(evtlab::MapKind::Viana); ++k) {
      const auto kind = static_cast<evtlab::MapKind>(k);
      const evtlab::SystemDescriptor system(example_params(kind));
      std::cout << fmt::format("{:<17} D={}  {}\n", evtlab::to_string(kind), system.dimension(),
                               evtlab::system_to_json(system.params()).dump());
    }
    return 0;
  }
  if (version->parsed()) {
    std::cout << "evtlab " << kVersion << '\n';
    return 0;
  }
  return 1;
}
