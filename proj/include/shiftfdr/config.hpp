#ifndef SHIFTFDR_CONFIG_HPP
#define SHIFTFDR_CONFIG_HPP

#include <stdexcept>
#include <string>

#include "shiftfdr/harness.hpp"

namespace shiftfdr {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plain-text key = value format with optional [sections] and # comments, or a
// resolved-config JSON document (detected by a leading brace). Scenario
// defaults fill keys left unset. Errors carry the offending line number.
// force_scenario comes from the CLI subcommand; a conflicting scenario key in
// the file is an error, an absent one is filled in.
ExperimentConfig parse_config_text(const std::string& text, const std::string& force_scenario = "");
ExperimentConfig load_config_file(const std::string& path, const std::string& force_scenario = "");

// Complete resolved configuration; re-ingesting it reproduces the run.
std::string resolved_config_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& json_text);

std::string results_csv(const ExperimentSummary& summary);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace shiftfdr

#endif
