#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhrm/dynamics.hpp"
#include "nhrm/geometry.hpp"

namespace nhrm {

using json = nlohmann::json;

/// Parses and fully validates a config document; throws ConfigError with a
/// field diagnostic on any violation. Returns the normalized config
/// (defaults filled in) so that validation never leaves partial output.
json validate_config(const json& config);

json parse_config_file(const std::filesystem::path& path);

/// One row-oriented CSV table; floats are written with 17 significant
/// digits, RFC-4180 style with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

std::string format_double(double v);

ModelParams model_from_json(const json& j);
PumpLoop loop_from_json(const json& j);
Band band_from_json(const std::string& name);

/// Experiment runners. Each writes config.echo, data files, plot.gp and
/// summary.json into outdir and returns the summary. Configs are validated
/// up front; numerical guards propagate as nhrm::Error.
json run_spectrum_scan(const json& config, const std::filesystem::path& outdir,
                       int threads = 1);
json run_chern(const json& config, const std::filesystem::path& outdir,
               int threads = 1);
json run_zak(const json& config, const std::filesystem::path& outdir,
             int threads = 1);
json run_edge_profile(const json& config, const std::filesystem::path& outdir,
                      int threads = 1);
json run_pump(const json& config, const std::filesystem::path& outdir,
              int threads = 1);

/// Dispatch on config["experiment"].
json run_experiment(const json& config, const std::filesystem::path& outdir,
                    int threads = 1);

}  // namespace nhrm
