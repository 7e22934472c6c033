#include <cstdio>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "legspec/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral invariants of Legendrians and contactomorphisms of J1 S1"};
  app.require_subcommand(1, 1);
  std::string config, out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  for (const auto& kind : legspec::scenario_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " scenario");
    sub->add_option("--config", config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (threads > 0) omp_set_num_threads(threads);
  const std::string kind = app.get_subcommands().front()->get_name();
  const int rc = legspec::run_scenario_files(kind, config, out, seed);
  std::printf("%s: %s\n", kind.c_str(), rc == 0 ? "pass" : rc == 1 ? "assertion failure" : "error");
  return rc;
}
