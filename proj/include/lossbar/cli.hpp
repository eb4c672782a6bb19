#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lossbar/config.hpp"

namespace lossbar::cli {

// Exit codes shared by every command.
enum Exit : int { kOk = 0, kToleranceFailure = 1, kConfigError = 2, kDivergence = 3 };

struct Context {
  RunConfig config;
  std::filesystem::path out_dir = "out";
  Exec exec = Exec::serial();
  std::ostream* out = nullptr;  // human-readable report
};

// Pipeline pieces shared by the commands and the acceptance suite.
std::vector<Minimum> load_or_sample_minima(const Context& ctx, const ScalarField& field,
                                           const std::optional<std::filesystem::path>& file);

struct CompareReport {
  BarcodeResult pipeline;
  PersistenceDiagram pipeline_diagram;
  PersistenceDiagram oracle_diagram;
  double distance = 0.0;
};
CompareReport run_compare(const RunConfig& config, Exec exec = Exec::serial());

struct DepthRow {
  std::size_t depth = 0;  // hidden layers
  MlpSpec spec;
  std::vector<Minimum> minima;
  BarcodeResult result;
  double median_death = 0.0;  // NaN without finite segments
};
std::vector<DepthRow> run_depth_study(const RunConfig& config, Exec exec = Exec::serial());

double median(std::vector<double> values);  // NaN for an empty list

// Each command writes its files into ctx.out_dir and returns an exit code.
// Errors propagate as exceptions; run() maps them to exit codes.
int cmd_minima(const Context& ctx);
int cmd_path(const Context& ctx, std::size_t from, std::size_t to);
int cmd_barcode(const Context& ctx, const std::optional<std::filesystem::path>& minima_file);
int cmd_toscore(const Context& ctx, const std::filesystem::path& barcode_file);
int cmd_morse(const Context& ctx, const std::optional<std::filesystem::path>& minima_file);
int cmd_compare(const Context& ctx, double tolerance);
int cmd_depth_study(const Context& ctx);
int cmd_plot(const Context& ctx, const std::filesystem::path& barcode_file);

// Exception -> exit code (2 for bad input, 3 for numerical failures).
int exit_code_for(const std::exception& e);

// Full command line, as main() sees it.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lossbar::cli
