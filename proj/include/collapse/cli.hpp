#pragma once

#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "collapse/evolution.hpp"
#include "collapse/measurement_model.hpp"

namespace collapse::cli {

/// Parsed scenario file plus command-line overrides.
struct RunConfig {
  MeasurementModel model;
  bool has_hamiltonian = false;
  IntegratorConfig integrator;
  EvolutionMode mode = EvolutionMode::Full;
  double alignment_tol = kDefaultAlignmentTolerance;
  double entropy_log_base = std::numbers::e;
  std::vector<double> gammas;
  std::filesystem::path out_dir = ".";
  bool plot = false;
};

// Throws ConfigError / ValidationError on malformed or inconsistent input.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<double> parse_gamma_list(const std::string& text);

// Exit codes: 0 success, 1 config/usage, 2 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

int run_simulate(const RunConfig& cfg, std::ostream& out);
int run_spectrum(const RunConfig& cfg, std::ostream& out);
int run_qsl(const RunConfig& cfg, std::ostream& out);
int run_sweep(const RunConfig& cfg, std::ostream& out);

// Full command line, argv[0] included. Catches every error and maps it to an exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace collapse::cli
