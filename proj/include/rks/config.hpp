#pragma once

// Experiment configuration files: a TOML subset with the sections
// [kernel], [lattice], [experiment], [quadrature] and [output].
//
//   key = 1.5 | 12 | "text" | true | [1, 2, 3]
//
// Comments start with '#'. Arrays hold scalars and fit on one line.

#include "rks/experiment.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rks {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string field, const std::string& message);
    int line() const noexcept { return line_; } // 0 when not tied to a line
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

struct ConfigInteger {
    bool negative = false;
    std::uint64_t magnitude = 0;
};

using ConfigScalar = std::variant<bool, ConfigInteger, double, std::string>;

struct ConfigValue {
    std::variant<ConfigScalar, std::vector<ConfigScalar>> data;
    int line = 0;
};

// Parsed key/value pairs keyed by "section.key".
class ConfigDocument {
public:
    static ConfigDocument parse(const std::string& text);
    static ConfigDocument load(const std::filesystem::path& path);

    const std::map<std::string, ConfigValue>& entries() const noexcept { return entries_; }
    bool contains(const std::string& key) const { return entries_.count(key) > 0; }
    void set(const std::string& key, ConfigValue value) { entries_[key] = std::move(value); }

    // One "section.key=value" line per entry in key order, values in a fixed
    // format; insensitive to ordering, spacing and comments in the source.
    std::string canonical() const;
    // SHA-256 of canonical(), lowercase hex.
    std::string digest() const;

private:
    std::map<std::string, ConfigValue> entries_;
};

struct OutputConfig {
    std::filesystem::path dir = ".";
    std::string trials_csv = "trials.csv";
    std::string sweep_csv = "sweep.csv";
    std::string report_json = "report.json";
    std::string constants_json = "constants.json";
    std::string verify_txt = "verify.txt";
    bool truncation = true; // sample: also run the truncation experiment
};

struct LoadedConfig {
    ConfigDocument document;
    ExperimentConfig experiment;
    OutputConfig output;
    std::string digest;
};

// Maps a document onto typed settings and checks every invariant; all
// problems surface as ConfigError with the line and field involved.
LoadedConfig interpret_config(ConfigDocument document);
LoadedConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {});

std::string sha256_hex(const std::string& data);

} // namespace rks
