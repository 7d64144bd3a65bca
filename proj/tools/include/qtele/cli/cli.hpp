#pragma once

// Command implementations behind the `qtele` binary. main() only parses the
// command line into an Invocation; everything else lives here so tests can
// drive it directly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtele/experiments.hpp"

namespace qtele::cli {

inline constexpr const char* kVersion = "0.3.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kDataFailure = 2, kNumericalFailure = 3, kOracleMismatch = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Quantity { kV2, kV3, kFx, kFz, kP2, kP3 };
Quantity parse_quantity(const std::string& s);
const char* to_string(Quantity q);

/// Flat key=value file; `#` starts a comment. Unknown keys are a usage error.
std::map<std::string, std::string> parse_config(std::istream& in);

inline constexpr const char* kParameterKeys[] = {"alpha2", "mu",    "zeta",    "eta_i",   "eta_s",
                                                 "phi",    "basis", "epsilon", "theta_in"};

/// Defaults, then the config file, then command-line overrides.
TeleportParams resolve_params(const std::map<std::string, std::string>& config,
                              const std::map<std::string, std::string>& overrides);

struct Axis {
  std::string name;
  bool log = true;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  std::vector<double> values() const;
};

/// "name:log|lin:min:max:count".
Axis parse_axis(const std::string& text);

/// One value of `q`; NaN where the quantity is undefined (vanishing
/// reference probability).
double evaluate(Quantity q, const TeleportParams& p);

void set_parameter(TeleportParams& p, const std::string& name, double value);

struct Invocation {
  std::string command;  ///< sweep, heatmap, fit, optimal-alpha, oracle-check, synth
  std::optional<std::filesystem::path> config;
  std::map<std::string, std::string> overrides;  ///< parameter flags, by config key
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> quantity;
  std::vector<std::string> axes;
  // fit
  std::optional<std::filesystem::path> dataset;
  std::string mode = "two_fold";
  bool floor_sigma = true;
  // oracle-check
  std::optional<int> cutoff;
  // synth
  double noise = 0.02;
};

/// Runs one subcommand. Results go to `out` unless inv.out names a file;
/// diagnostics go to `err`. Returns an ExitCode.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Lower-case hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace qtele::cli
