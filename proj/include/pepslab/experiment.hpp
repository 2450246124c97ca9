#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace pepslab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& experiment_kinds();

struct ExperimentConfig {
  std::string kind;
  Json parameters;  // defaults filled in by parse_config
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;
  int schema_version = kSchemaVersion;
};

// Empty iff parse_config accepts the document. Besides schema problems this
// reports resource guards (enumeration counts, dense dimensions) that the run
// would trip over.
std::vector<std::string> validate(const Json& config);

// Throws SchemaError carrying the diagnostics of validate().
ExperimentConfig parse_config(const Json& config);
Json read_config_file(const std::filesystem::path& file);
ExperimentConfig load_config(const std::filesystem::path& file);

Json to_json(const ExperimentConfig& c);

struct RunOptions {
  int jobs = 1;
  // Overrides config.output_dir when non-empty.
  std::filesystem::path output_dir;
  // Added to every seed; see seed_offset_from_env.
  std::uint64_t seed_offset = 0;
};

// PEPSLAB_SEED_OFFSET, 0 when unset. Throws DomainError on a malformed value.
std::uint64_t seed_offset_from_env();

struct TableInfo {
  std::string file;
  std::vector<std::string> header;
  std::size_t rows = 0;
};

// One unit of work: a seed, or a (D, d) point for the deterministic kinds.
struct SeedStatus {
  std::string unit;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string message;
};

struct RunArtifact {
  std::filesystem::path dir;
  Json manifest;
  std::vector<TableInfo> tables;
  std::vector<SeedStatus> status;
  std::string plotscript;  // file name inside dir

  bool all_failed() const;
};

// Writes the CSV tables, manifest.json and plot.gp into the output directory.
// A failing seed is recorded in the manifest and the sweep goes on.
RunArtifact run(const ExperimentConfig& config, const RunOptions& opt = {});

}  // namespace pepslab
