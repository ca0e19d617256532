#pragma once

#include "sphw/errors.hpp"
#include "sphw/experiments.hpp"

#include <filesystem>
#include <string>

namespace sphw {

/// Schema violation or malformed document. `where()` holds a
/// "source:line" prefix when the offending text can be located.
class ConfigError : public Error {
public:
    ConfigError(std::string where, std::string field, const std::string& what)
        : Error(where + (field.empty() ? "" : ": field '" + field + "'") + ": " + what),
          where_(std::move(where)),
          field_(std::move(field)) {}

    const std::string& where() const noexcept { return where_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string where_;
    std::string field_;
};

struct RunConfig {
    ExperimentPlan plan;
    std::filesystem::path output_dir = "out";
    /// Threads per simulation force loop.
    int workers = 1;
    /// Independent resolutions simulated at once.
    int parallel_runs = 1;
    std::string verbosity = "info";
};

/// Parses a JSON run configuration. A manifest written by emit_report is
/// accepted too; its "config" member is used. Unknown keys are rejected.
/// The SPHW_OUTPUT_DIR environment variable, when set, overrides
/// output_dir.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Normalized JSON form with every field spelled out; parses back to an
/// equal configuration.
std::string to_json(const RunConfig& cfg);

} // namespace sphw
