#include <cstdio>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "leelab/leelab.h"

namespace {

enum Exit { kPass = 0, kAssertion = 1, kConfig = 2, kOther = 3 };

int report_error(leelab_status status) {
  std::fprintf(stderr, "error [%s]: %s\n", leelab_status_string(status), leelab_last_error());
  return status == LEELAB_CONFIG_ERROR ? kConfig : kOther;
}

void print_summary(const char* command, const leelab_result* result) {
  const auto payload = nlohmann::json::parse(leelab_result_payload(result));
  std::printf("command     %s\n", command);
  std::printf("config hash %s\n", leelab_result_config_hash(result));
  std::printf("results     %s%s\n", leelab_result_directory(result),
              leelab_result_from_cache(result) ? " (cached)" : "");
  for (const auto& [key, value] : payload.items()) {
    if (value.is_number_float())
      std::printf("  %-34s %.12g\n", key.c_str(), value.get<double>());
    else if (value.is_number_integer() || value.is_boolean())
      std::printf("  %-34s %s\n", key.c_str(), value.dump().c_str());
  }
  for (const auto& a : payload["assertions"]) {
    auto detail = a;
    detail.erase("name");
    detail.erase("passed");
    std::printf("%s %s %s\n", a["passed"].get<bool>() ? "pass" : "FAIL",
                a["name"].get<std::string>().c_str(), detail.empty() ? "" : detail.dump().c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the 2+1 dimensional Lee model"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  bool oracle = false, no_cache = false;
  int threads = 1;
  app.add_option("--config", config_path, "JSON run configuration (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "results directory (overrides config and LEELAB_OUTPUT_DIR)");
  app.add_flag("--oracle", oracle, "cross-check against the explicit block Hamiltonian");
  app.add_flag("--no-cache", no_cache, "recompute even when a cached result exists");
  app.add_option("--threads", threads, "worker threads for grid scans")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", leelab_version());

  const std::map<std::string, std::string> blurbs{
      {"renorm", "bare mass mu(Lambda) over the cutoff sweep, with a log fit"},
      {"flow", "eigenvalue flow of the principal operator over the E grid"},
      {"groundstate", "root of omega_0(E) = 0 and the two-component wavefunction"},
      {"bounds", "variational and compact lower bounds around the ground energy"},
      {"resolvent-check", "block resolvent, pseudo-resolvent identity and decay checks"},
      {"heatkernel", "heat-kernel diagonal, image sum and the fitted bound constant"},
      {"lightfront-bounds", "light-front K1, U-norm bound and beta-term decay"},
  };
  for (int i = 0; i < leelab_command_count(); ++i) {
    const std::string name = leelab_command_name(i);
    auto it = blurbs.find(name);
    app.add_subcommand(name, it == blurbs.end() ? "" : it->second);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  leelab_session* session = nullptr;
  const leelab_status created = config_path.empty()
                                    ? leelab_session_create(nullptr, &session)
                                    : leelab_session_create_from_file(config_path.c_str(), &session);
  if (created != LEELAB_OK) return report_error(created);

  leelab_run_options options;
  leelab_run_options_init(&options);
  options.oracle = oracle;
  options.use_cache = !no_cache;
  options.threads = threads;
  if (!out_dir.empty()) options.output_directory = out_dir.c_str();

  leelab_result* result = nullptr;
  const leelab_status status = leelab_run(session, command.c_str(), &options, &result);
  if (status != LEELAB_OK) {
    leelab_session_destroy(session);
    return report_error(status);
  }
  print_summary(command.c_str(), result);
  const bool passed = leelab_result_passed(result);
  if (!passed) std::fprintf(stderr, "assertion failed: %s\n", leelab_result_failure(result));
  leelab_result_destroy(result);
  leelab_session_destroy(session);
  return passed ? kPass : kAssertion;
}
