#include "tumorsynth/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace tumorsynth {

static_assert(std::endian::native == std::endian::little,
              "NIfTI codec assumes a little-endian host");

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kVoxOffset = 352;

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;

template <typename T>
T load(const std::uint8_t* base, std::size_t offset) {
  T v;
  std::memcpy(&v, base + offset, sizeof(T));
  return v;
}

template <typename T>
void store(std::uint8_t* base, std::size_t offset, T v) {
  std::memcpy(base + offset, &v, sizeof(T));
}

std::size_t bytes_per_voxel(StorageType t) {
  switch (t) {
    case StorageType::uint8: return 1;
    case StorageType::int16: return 2;
    case StorageType::float32: return 4;
  }
  return 0;
}

std::int16_t datatype_code(StorageType t) {
  switch (t) {
    case StorageType::uint8: return kDtUint8;
    case StorageType::int16: return kDtInt16;
    case StorageType::float32: return kDtFloat32;
  }
  return 0;
}

bool has_suffix(const std::filesystem::path& p, std::string_view suffix) {
  const std::string s = p.string();
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Affine affine_from_spacing(const Spacing& spacing) {
  Affine a;
  a.rows = {{{static_cast<float>(spacing.sx), 0, 0, 0},
             {0, static_cast<float>(spacing.sy), 0, 0},
             {0, 0, static_cast<float>(spacing.sz), 0}}};
  return a;
}

std::vector<std::uint8_t> gzip_compress(const std::vector<std::uint8_t>& raw) {
  z_stream zs{};
  // windowBits 15 + 16 selects the gzip wrapper; zlib writes mtime 0, so
  // output depends only on the input bytes.
  if (deflateInit2(&zs, Z_BEST_SPEED, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(Errc::io, "deflateInit2 failed");
  }
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(raw.size())) + 64);
  zs.next_in = const_cast<Bytef*>(raw.data());
  zs.avail_in = static_cast<uInt>(raw.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(Errc::io, "gzip compression failed");
  out.resize(produced);
  return out;
}

std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& compressed) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw Error(Errc::io, "inflateInit2 failed");
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 20);
  zs.next_in = const_cast<Bytef*>(compressed.data());
  zs.avail_in = static_cast<uInt>(compressed.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error(Errc::corrupt_header, "gzip stream is corrupt or truncated");
    }
    out.insert(out.end(), chunk.begin(), chunk.end() - zs.avail_out);
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw Error(Errc::corrupt_header, "gzip stream is truncated");
    }
  }
  inflateEnd(&zs);
  return out;
}

NiftiImage decode_nifti(const std::vector<std::uint8_t>& file_bytes) {
  std::vector<std::uint8_t> inflated;
  const std::vector<std::uint8_t>* bytes = &file_bytes;
  if (file_bytes.size() >= 2 && file_bytes[0] == 0x1F && file_bytes[1] == 0x8B) {
    inflated = gzip_decompress(file_bytes);
    bytes = &inflated;
  }
  const auto& b = *bytes;
  if (b.size() < kHeaderSize) {
    throw Error(Errc::corrupt_header, "file shorter than the 348-byte NIfTI-1 header");
  }
  const std::uint8_t* h = b.data();
  const auto sizeof_hdr = load<std::int32_t>(h, 0);
  if (sizeof_hdr == 540) {
    throw Error(Errc::unsupported_format, "NIfTI-2 files are not supported");
  }
  if (sizeof_hdr != 348) {
    if (__builtin_bswap32(static_cast<std::uint32_t>(sizeof_hdr)) == 348u) {
      throw Error(Errc::unsupported_format, "big-endian NIfTI files are not supported");
    }
    throw Error(Errc::corrupt_header, "sizeof_hdr is " + std::to_string(sizeof_hdr));
  }
  if (std::memcmp(h + 344, "ni1\0", 4) == 0) {
    throw Error(Errc::unsupported_format, "two-file (.hdr/.img) NIfTI is not supported");
  }
  if (std::memcmp(h + 344, "n+1\0", 4) != 0) {
    throw Error(Errc::corrupt_header, "missing NIfTI-1 magic");
  }

  std::int16_t dim[8];
  for (int i = 0; i < 8; ++i) dim[i] = load<std::int16_t>(h, 40 + 2 * i);
  if (dim[0] < 1 || dim[0] > 7) throw Error(Errc::corrupt_header, "dim[0] out of range");
  for (int i = 1; i <= dim[0]; ++i) {
    if (dim[i] <= 0) throw Error(Errc::invalid_geometry, "non-positive dimension");
  }
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] != 1) {
      throw Error(Errc::unsupported_format, "multi-frame volumes are not supported");
    }
  }
  const Dims dims{dim[1], dim[0] >= 2 ? dim[2] : 1, dim[0] >= 3 ? dim[3] : 1};

  float pixdim[8];
  for (int i = 0; i < 8; ++i) pixdim[i] = load<float>(h, 76 + 4 * i);
  const Spacing spacing{pixdim[1], dim[0] >= 2 ? pixdim[2] : 1.0,
                        dim[0] >= 3 ? pixdim[3] : 1.0};
  if (!(spacing.sx > 0.0) || !(spacing.sy > 0.0) || !(spacing.sz > 0.0)) {
    throw Error(Errc::invalid_geometry, "pixdim must be positive");
  }

  const auto dt = load<std::int16_t>(h, 70);
  StorageType type;
  switch (dt) {
    case kDtUint8: type = StorageType::uint8; break;
    case kDtInt16: type = StorageType::int16; break;
    case kDtFloat32: type = StorageType::float32; break;
    default:
      throw Error(Errc::unsupported_datatype, "NIfTI datatype " + std::to_string(dt));
  }

  const float vox_offset_f = load<float>(h, 108);
  if (!(vox_offset_f >= static_cast<float>(kHeaderSize)) || !std::isfinite(vox_offset_f)) {
    throw Error(Errc::corrupt_header, "vox_offset invalid");
  }
  const auto vox_offset = static_cast<std::size_t>(vox_offset_f);
  const std::size_t n = static_cast<std::size_t>(dims.count());
  const std::size_t need = vox_offset + n * bytes_per_voxel(type);
  if (b.size() < need) {
    throw Error(Errc::corrupt_header, "voxel data truncated: have " + std::to_string(b.size()) +
                                          " bytes, need " + std::to_string(need));
  }

  float slope = load<float>(h, 112);
  float inter = load<float>(h, 116);
  const bool scale = std::isfinite(slope) && slope != 0.0f && !(slope == 1.0f && inter == 0.0f);

  std::vector<float> values(n);
  const std::uint8_t* data = h + vox_offset;
  for (std::size_t i = 0; i < n; ++i) {
    float v = 0.0f;
    switch (type) {
      case StorageType::uint8: v = static_cast<float>(data[i]); break;
      case StorageType::int16: v = static_cast<float>(load<std::int16_t>(data, 2 * i)); break;
      case StorageType::float32: v = load<float>(data, 4 * i); break;
    }
    values[i] = scale ? v * slope + inter : v;
  }

  NiftiImage img{VoxelGrid(dims, spacing, std::move(values)), type, affine_from_spacing(spacing),
                 false};
  if (load<std::int16_t>(h, 254) > 0) {
    img.has_sform = true;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) img.affine.rows[r][c] = load<float>(h, 280 + 16 * r + 4 * c);
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_nifti(const VoxelGrid& grid, StorageType datatype,
                                       const Affine& affine) {
  const std::size_t n = static_cast<std::size_t>(grid.size());
  std::vector<std::uint8_t> out(kVoxOffset + n * bytes_per_voxel(datatype), 0);
  std::uint8_t* h = out.data();
  store<std::int32_t>(h, 0, 348);
  store<char>(h, 38, 'r');
  const Dims& d = grid.dims();
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(d.nx), static_cast<std::int16_t>(d.ny),
                               static_cast<std::int16_t>(d.nz), 1, 1, 1, 1};
  if (d.nx > std::numeric_limits<std::int16_t>::max() ||
      d.ny > std::numeric_limits<std::int16_t>::max() ||
      d.nz > std::numeric_limits<std::int16_t>::max()) {
    throw Error(Errc::invalid_geometry, "dimension exceeds NIfTI-1 limit");
  }
  for (int i = 0; i < 8; ++i) store<std::int16_t>(h, 40 + 2 * i, dim[i]);
  store<std::int16_t>(h, 70, datatype_code(datatype));
  store<std::int16_t>(h, 72, static_cast<std::int16_t>(8 * bytes_per_voxel(datatype)));
  const float pixdim[8] = {1.0f,
                           static_cast<float>(grid.spacing().sx),
                           static_cast<float>(grid.spacing().sy),
                           static_cast<float>(grid.spacing().sz),
                           1.0f, 1.0f, 1.0f, 1.0f};
  for (int i = 0; i < 8; ++i) store<float>(h, 76 + 4 * i, pixdim[i]);
  store<float>(h, 108, static_cast<float>(kVoxOffset));
  store<float>(h, 112, 1.0f);
  store<float>(h, 116, 0.0f);
  store<std::uint8_t>(h, 123, 2);  // mm
  const char descrip[] = "tumorsynth";
  std::memcpy(h + 148, descrip, sizeof(descrip) - 1);
  store<std::int16_t>(h, 254, 1);  // sform_code: scanner
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) store<float>(h, 280 + 16 * r + 4 * c, affine.rows[r][c]);
  }
  std::memcpy(h + 344, "n+1\0", 4);

  std::uint8_t* data = h + kVoxOffset;
  auto values = grid.values();
  for (std::size_t i = 0; i < n; ++i) {
    const float v = values[i];
    switch (datatype) {
      case StorageType::uint8: {
        const long r = std::lround(std::clamp(v, 0.0f, 255.0f));
        data[i] = static_cast<std::uint8_t>(r);
        break;
      }
      case StorageType::int16: {
        const long r = std::lround(std::clamp(v, -32768.0f, 32767.0f));
        store<std::int16_t>(data, 2 * i, static_cast<std::int16_t>(r));
        break;
      }
      case StorageType::float32: store<float>(data, 4 * i, v); break;
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "short write to " + path.string());
}

NiftiImage read_nifti(const std::filesystem::path& path) {
  return decode_nifti(read_file_bytes(path));
}

void write_nifti(const std::filesystem::path& path, const VoxelGrid& grid, StorageType datatype,
                 const Affine& affine) {
  auto bytes = encode_nifti(grid, datatype, affine);
  if (has_suffix(path, ".gz")) bytes = gzip_compress(bytes);
  write_file_bytes(path, bytes);
}

CtVolume read_volume(const std::filesystem::path& path) {
  NiftiImage img = read_nifti(path);
  for (auto& v : img.grid.values()) v = std::clamp(v, CtVolume::kMinHu, CtVolume::kMaxHu);
  return CtVolume{std::move(img.grid), img.affine, img.datatype};
}

void write_volume(const std::filesystem::path& path, const CtVolume& volume) {
  write_nifti(path, volume.grid, volume.storage, volume.affine);
}

LabelMask read_mask(const std::filesystem::path& path) {
  NiftiImage img = read_nifti(path);
  Grid<std::uint8_t> labels(img.grid.dims(), img.grid.spacing(), std::uint8_t{0});
  auto src = img.grid.values();
  for (std::int64_t i = 0; i < img.grid.size(); ++i) {
    const float v = src[i];
    if (v != std::floor(v) || v < 0.0f || v > static_cast<float>(LabelMask::kTumor)) {
      throw Error(Errc::invalid_argument,
                  path.string() + ": label value " + std::to_string(v) + " outside {0,1,2}");
    }
    labels[i] = static_cast<std::uint8_t>(v);
  }
  return LabelMask(std::move(labels));
}

void write_mask(const std::filesystem::path& path, const LabelMask& mask, const Affine& affine) {
  const auto& g = mask.grid();
  VoxelGrid values(g.dims(), g.spacing(), std::vector<float>(g.storage().begin(), g.storage().end()));
  write_nifti(path, values, StorageType::uint8, affine);
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask, const Affine& affine) {
  const auto& g = mask.grid();
  VoxelGrid values(g.dims(), g.spacing(), std::vector<float>(g.storage().begin(), g.storage().end()));
  write_nifti(path, values, StorageType::uint8, affine);
}

}  // namespace tumorsynth
