#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hsi {

/// W x H x N reflectance raster. `data` has one row per pixel (row-major
/// scan, index = row * width + col) and one column per band; Eigen's
/// column-major storage makes the buffer byte-for-byte band-sequential.
struct HyperspectralCube {
  std::size_t width = 0;
  std::size_t height = 0;
  Eigen::MatrixXf data;
  std::vector<double> wavelengths;  // micrometers, empty or one per band

  std::size_t n_bands() const { return static_cast<std::size_t>(data.cols()); }
  std::size_t n_pixels() const { return width * height; }

  float at(std::size_t band, std::size_t row, std::size_t col) const {
    return data(static_cast<Eigen::Index>(row * width + col), static_cast<Eigen::Index>(band));
  }

  bool operator==(const HyperspectralCube& other) const;
};

/// Per-pixel class labels; 0 is background, classes are 1..n_classes.
struct GroundTruthMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> labels;
  std::size_t n_classes = 0;
  std::vector<std::string> class_names;

  std::uint16_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }
};

/// Unvalidated u16 raster (prediction maps may miss some classes).
struct LabelRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> labels;
};

struct CubeHeader {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 0;
  std::string dtype = "f32";
  std::string interleave = "bsq";
  std::string byte_order = "little";
  std::vector<double> wavelengths;
  std::optional<std::size_t> classes;
  std::vector<std::string> class_names;
};

CubeHeader read_header(const std::filesystem::path& header_path);
void write_header(const std::filesystem::path& header_path, const CubeHeader& header);

/// Raw payload sits next to the header with a `.raw` extension.
std::filesystem::path raw_path_for(const std::filesystem::path& header_path);

/// Throws ValidationError naming the first invariant violated.
void validate(const HyperspectralCube& cube);

/// Checks that labels 1..max are all present and returns max. Throws
/// ValidationError listing the missing labels otherwise.
std::size_t validate_labels(std::span<const std::uint16_t> labels);

HyperspectralCube load_cube(const std::filesystem::path& header_path);
void save_cube(const HyperspectralCube& cube, const std::filesystem::path& header_path);

GroundTruthMap load_ground_truth(const std::filesystem::path& header_path);
void save_ground_truth(const GroundTruthMap& gt, const std::filesystem::path& header_path);

/// Same on-disk format as the ground truth, without the contiguity check.
void save_label_raster(const LabelRaster& raster, const std::filesystem::path& header_path,
                       std::optional<std::size_t> classes = std::nullopt);
LabelRaster load_label_raster(const std::filesystem::path& header_path);

/// Builds a validated map from a label buffer.
GroundTruthMap make_ground_truth(std::size_t width, std::size_t height, std::vector<std::uint16_t> labels,
                                 std::vector<std::string> class_names = {});

// Ingest of foreign rasters (integer counts, BIL/BIP dumps) into the native
// f32 BSQ representation.

enum class SampleType { u8, u16, i16, i32, f32, f64 };
enum class Interleave { bsq, bil, bip };

struct RawLayout {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t bands = 1;
  SampleType type = SampleType::u16;
  Interleave interleave = Interleave::bsq;
  bool big_endian = false;
  std::size_t header_offset = 0;  // bytes skipped at the start of the file
};

SampleType parse_sample_type(const std::string& name);
Interleave parse_interleave(const std::string& name);

HyperspectralCube import_cube(const std::filesystem::path& raw_file, const RawLayout& layout);
GroundTruthMap import_ground_truth(const std::filesystem::path& raw_file, const RawLayout& layout);

}  // namespace hsi
