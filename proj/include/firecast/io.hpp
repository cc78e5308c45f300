#pragma once

#include "firecast/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace firecast {

/**
 * Sidecar descriptor for flat binary payloads. Grid data files pair
 * `<stem>.json` with `<stem>.f32` (little-endian float32, order
 * "time,row,col"); the land mask pairs its descriptor with `<stem>.bytes`
 * (0/1 bytes, row-major).
 */
struct GridDescriptor {
    std::string variable;
    int lat_count = 0;
    int lon_count = 0;
    int time_len = 0;
    std::string order = "time,row,col";
};

void write_descriptor(const std::filesystem::path& path, const GridDescriptor& desc);
GridDescriptor read_descriptor(const std::filesystem::path& path);

// Raw little-endian payload helpers (endian-independent byte encoding).
void write_f32_payload(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_f32_payload(const std::filesystem::path& path);
void write_f64_payload(const std::filesystem::path& path, const double* values, std::size_t count);
std::vector<double> read_f64_payload(const std::filesystem::path& path);
void write_byte_payload(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_byte_payload(const std::filesystem::path& path);

/// Writes `<dir>/<stem>.json` + `<dir>/<stem>.f32` for one variable.
void write_series(const std::filesystem::path& dir, const std::string& stem,
                  const SnapshotSeries& series);
SnapshotSeries read_series(const std::filesystem::path& dir, const std::string& stem);

void write_mask(const std::filesystem::path& dir, const std::string& stem, const LandMask& mask);
LandMask read_mask(const std::filesystem::path& dir, const std::string& stem);

/// CSV import for small desk-scale grids. Header "time,row,col,value";
/// extents are inferred from the maximum indices, missing cells read 0.
SnapshotSeries read_csv_series(const std::filesystem::path& path, const std::string& variable);
void write_csv_series(const std::filesystem::path& path, const SnapshotSeries& series);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Decimal serialization with 17 significant digits (round-trips doubles).
std::string format_g17(double value);

}  // namespace firecast
