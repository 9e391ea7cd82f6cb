#pragma once

#include "qsd/grid.hpp"
#include "qsd/survival.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qsd {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Fixed 17-significant-digit text; round-trips every finite double.
std::string format_double(double v);

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

/// "# config_hash=<hex>" line written at the top of every numeric output.
std::string provenance_line(const std::string& config_hash);

/// One row per cell: axis centers then density, with a header row
/// `axis0_center,...,density`. Lines starting with '#' are comments; a
/// "# grid" comment records the exact bounds so the file can be read back.
void write_density_csv(const std::filesystem::path& path, const DensityGrid& d,
                       const std::string& config_hash);
DensityGrid read_density_csv(const std::filesystem::path& path);

/// One value per line.
void write_values(const std::filesystem::path& path, const std::vector<double>& values,
                  const std::string& config_hash);
std::vector<double> read_values(const std::filesystem::path& path);

/// "key=value" lines.
void write_key_values(const std::filesystem::path& path, const KeyValues& kv,
                      const std::string& config_hash);
KeyValues read_key_values(const std::filesystem::path& path);

/// time,survivors,p,lower,upper[,extra] rows.
void write_survival_csv(const std::filesystem::path& path, const SurvivalCurve& curve,
                        const std::vector<double>& extra, const std::string& extra_name,
                        const std::string& config_hash);

}  // namespace qsd
