#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "faz3d/types.hpp"

namespace faz3d {

/// Everything stored in one scan container directory.
struct Scan {
    OctaVolume volume;
    SurfaceSet surfaces;
    std::array<EnFaceImage, 3> enfaces;
};

// Scan container layout (a directory):
//   meta                         text, "key = value" lines, last line header_crc32
//   volume.raw                   float32 LE, nx*ny*nz, x fastest then y then z
//   surface_{ilm,ipl,opl,rpe}.raw    float32 LE, nx*ny
//   enface_{superficial,intermediate,deep}.raw   float32 LE, nx*ny
// meta carries a CRC-32 for every raw file plus one over the meta text itself.

[[nodiscard]] Scan load_scan(const std::filesystem::path& dir);
void save_scan(const Scan& scan, const std::filesystem::path& dir);

/// CRC-32 (zlib polynomial) of a byte buffer.
[[nodiscard]] std::uint32_t crc32_of(std::span<const std::byte> bytes);

/// Raw float32 little-endian helpers; also used for stage dumps.
void write_raw_f32(const std::filesystem::path& path, std::span<const float> values);
[[nodiscard]] std::vector<float> read_raw_f32(const std::filesystem::path& path, std::size_t expected_count);
void write_raw_u8(const std::filesystem::path& path, std::span<const std::uint8_t> values);

inline constexpr std::array<const char*, 8> kMeasurementColumns{
    "scan_id", "group_label", "res_plane_um", "area_svc_mm2",
    "area_icp_mm2", "area_dcp_mm2", "volume_mm3", "elapsed_seconds"};

void write_measurements(std::span<const FazMeasurement> records, const std::filesystem::path& path);
[[nodiscard]] std::string format_measurements(std::span<const FazMeasurement> records);
[[nodiscard]] std::vector<FazMeasurement> read_measurements(const std::filesystem::path& path);

/// Splits one CSV line, honoring double quotes.
[[nodiscard]] std::vector<std::string> split_csv_line(const std::string& line);
[[nodiscard]] std::string csv_escape(const std::string& field);

}  // namespace faz3d
