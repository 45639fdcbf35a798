#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

/// Raw NIfTI-1 image as stored on disk, after scl_slope/scl_inter.
struct NiftiImage {
  VoxelGrid grid;
  StorageType datatype = StorageType::float32;
  Affine affine{};
  bool has_sform = false;
};

Affine affine_from_spacing(const Spacing& spacing);

/// Parses a single-file NIfTI-1 image (.nii or gzip-compressed .nii.gz).
/// Errors: Errc::io, corrupt_header, unsupported_format,
/// unsupported_datatype, invalid_geometry.
NiftiImage decode_nifti(const std::vector<std::uint8_t>& bytes);

/// Encodes to the single-file layout: 348-byte header, 4 zero extension
/// bytes, voxel data. Values are rounded for integer datatypes.
std::vector<std::uint8_t> encode_nifti(const VoxelGrid& grid, StorageType datatype,
                                       const Affine& affine);

NiftiImage read_nifti(const std::filesystem::path& path);
/// gzip-compresses when the path ends in ".gz".
void write_nifti(const std::filesystem::path& path, const VoxelGrid& grid, StorageType datatype,
                 const Affine& affine);

/// Loads a CT volume and clamps values to [-1024, 3071] HU.
CtVolume read_volume(const std::filesystem::path& path);
void write_volume(const std::filesystem::path& path, const CtVolume& volume);

/// Loads an integer label image with values in {0,1,2}.
LabelMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const LabelMask& mask,
                const Affine& affine);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask,
                const Affine& affine);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& raw);
std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& compressed);

}  // namespace tumorsynth
