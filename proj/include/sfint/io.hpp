#ifndef SFINT_IO_HPP
#define SFINT_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sfint/model.hpp"
#include "sfint/sampler.hpp"
#include "sfint/simulation.hpp"

namespace sfint {

/// Comma-delimited matrix: first row holds the sample ids (after an empty or
/// arbitrary corner cell), first column the feature ids.
DataMatrix read_data_csv(const std::string& path);
void write_data_csv(const DataMatrix& data, const std::string& path);

/// Flat configuration: `section.key = value` lines, `#` starts a comment.
using Config = std::map<std::string, std::string>;

Config parse_config(const std::string& text, const std::string& origin = "<config>");
Config read_config(const std::string& path);
/// Applies one `section.key=value` override. Throws ParseError on unknown keys.
void apply_override(Config& config, const std::string& assignment);
/// Every key the tools understand, with its default (empty when optional).
const Config& config_defaults();
/// Defaults overlaid with `config`; unknown keys are rejected.
Config resolve_config(const Config& config);

/// Reads an index list such as "0-9, 12, 15-17".
std::vector<Index> parse_index_list(const std::string& text);

ModelSpec spec_from_config(const Config& config);
McmcSettings mcmc_from_config(const Config& config);
MhSettings mh_from_config(const Config& config);
SaddleOptions simulation_from_config(const Config& config);

inline constexpr std::uint32_t kDrawsFormatVersion = 1;

/// Binary draws file. Layout (little-endian): 8-byte magic "SFDRAWS\0",
/// u32 format version, payload, then the CRC-32 of every preceding byte.
/// Payload: u8 family, i32 total_iters, burn_in, thin, f64 rw_step, the MH
/// tallies as (u64 count, i64 values), u64 state count, then per state the
/// eleven state blocks in declaration order as (i64 rows, i64 cols,
/// column-major values; f64 for real blocks, i32 for indicators).
void save_draws(const PosteriorDraws& draws, const std::string& path);
/// Throws FormatVersionMismatch or CorruptFile.
PosteriorDraws load_draws(const std::string& path);

std::uint32_t file_crc32(const std::string& path);

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::uint32_t crc32 = 0;
    std::uint64_t bytes = 0;
};

/// Writes manifest.json into `dir` with the command, resolved config, seed
/// and the checksum of every listed file.
void write_manifest(const std::string& dir, const std::string& command, const Config& resolved,
                    std::uint64_t seed, const std::vector<std::string>& files);
/// Files whose checksum no longer matches the manifest (empty when intact).
std::vector<std::string> verify_manifest(const std::string& dir);

}  // namespace sfint

#endif  // SFINT_IO_HPP
