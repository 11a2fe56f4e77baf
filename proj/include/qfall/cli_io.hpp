#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "qfall/experiments.hpp"

namespace qfall::cli_io {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // ran to completion, check did not pass
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

struct ExperimentBlock {
  std::vector<double> masses;
  std::vector<wavepacket::PacketShape> shapes;
  std::vector<double> dt_list;
  std::optional<std::array<double, 2>> order_band;
  double wep_tolerance = experiments::kDefaultWepTolerance;
};

struct ScenarioConfig {
  experiments::Scenario scenario;
  ExperimentBlock experiment;
};

/// Parses and validates a scenario document. Unknown keys, malformed values and
/// violated module preconditions raise Error. Relative table paths resolve
/// against base_dir.
ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration (defaults filled in), echoed into outputs.
json resolved_json(const ScenarioConfig& cfg);

json to_json(const experiments::WepReport& rep);
json to_json(const experiments::RippleReport& rep);
json to_json(const experiments::ConvergenceReport& rep);

std::string csv_header(int dim);

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out, std::ostream& log);
int cmd_wep(const std::filesystem::path& config, const std::filesystem::path& out, std::ostream& log);
int cmd_ripple(const std::filesystem::path& config, const std::filesystem::path& out,
               std::ostream& log);
int cmd_converge(const std::filesystem::path& config, const std::filesystem::path& out,
                 std::ostream& log);

/// `qfall run|wep|ripple|converge --config <path> --out <path>`
int main_entry(int argc, char** argv);

}  // namespace qfall::cli_io
