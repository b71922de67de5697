#pragma once

#include <cstdint>
#include <filesystem>

#include "mftb/drift.hpp"

namespace mftb::io {

/// On-disk feature-cloud format, little-endian throughout:
///   bytes 0..3    magic "MFTB"
///   bytes 4..7    version (u32) = 1
///   bytes 8..15   n_rows (u64)
///   bytes 16..23  dim (u64)
///   byte  24      dtype code: 1 = float64, 2 = float32
///   byte  25      normalized flag: 0 or 1
///   bytes 26..39  reserved, all zero
/// followed by n_rows * dim values in row-major order.
inline constexpr char kMagic[4] = {'M', 'F', 'T', 'B'};
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderSize = 40;

enum class Dtype : std::uint8_t {
  kFloat64 = 1,
  kFloat32 = 2,
};

/// Writes header plus row-major payload. Float32 payloads round each entry.
void save_feature_matrix(const drift::FeatureMatrix& matrix,
                         const std::filesystem::path& path,
                         Dtype dtype = Dtype::kFloat64);

/// Decodes a feature file. Float32 payloads are widened to float64. When the
/// normalized flag is set, every row is checked to unit norm within 1e-5.
drift::FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

/// Text import for hand-authored fixtures: first line "dim=<d>", then one
/// comma-separated row per line. The result carries normalized = false.
drift::FeatureMatrix load_feature_matrix_csv(
    const std::filesystem::path& path);

}  // namespace mftb::io
