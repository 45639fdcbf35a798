#include <doctest.h>

#include <cstring>
#include <random>

#include "scratch_dir.hpp"
#include "tumorsynth/error.hpp"
#include "tumorsynth/nifti.hpp"

using namespace tumorsynth;

namespace {

VoxelGrid random_grid(const Dims& d, const Spacing& s, float lo, float hi, std::uint32_t seed,
                      bool integral) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  VoxelGrid g(d, s);
  for (auto& v : g.values()) v = integral ? std::round(u(rng)) : u(rng);
  return g;
}

Errc code_of(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_nifti(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("decode unexpectedly succeeded");
  return Errc::invalid_argument;
}

}  // namespace

TEST_SUITE("nifti") {

TEST_CASE("int16 round trip through a file") {
  ScratchDir dir("nifti");
  const VoxelGrid g = random_grid(Dims{16, 16, 16}, Spacing{}, -1024, 3071, 1, true);
  write_nifti(dir / "v.nii", g, StorageType::int16, affine_from_spacing(g.spacing()));
  const NiftiImage back = read_nifti(dir / "v.nii");
  CHECK(back.grid == g);
  CHECK(back.datatype == StorageType::int16);
}

TEST_CASE("every datatype round trips in memory") {
  const Spacing s{0.75, 0.5, 2.5};  // float-exact; pixdim is float32
  const std::pair<StorageType, VoxelGrid> cases[] = {
      {StorageType::uint8, random_grid(Dims{5, 4, 3}, s, 0, 255, 2, true)},
      {StorageType::int16, random_grid(Dims{5, 4, 3}, s, -32768, 32767, 3, true)},
      {StorageType::float32, random_grid(Dims{5, 4, 3}, s, -1e4f, 1e4f, 4, false)},
  };
  for (const auto& [type, g] : cases) {
    const auto bytes = encode_nifti(g, type, affine_from_spacing(s));
    CHECK(bytes.size() == 352 + static_cast<std::size_t>(g.size()) *
                                    (type == StorageType::uint8 ? 1 : type == StorageType::int16 ? 2 : 4));
    const NiftiImage back = decode_nifti(bytes);
    CHECK(back.grid == g);
    CHECK(back.datatype == type);
    CHECK(back.affine == affine_from_spacing(s));
  }
}

TEST_CASE("pixdim maps onto spacing") {
  const VoxelGrid g(Dims{3, 3, 3}, Spacing{1.5, 1.5, 3.0});
  const NiftiImage back = decode_nifti(encode_nifti(g, StorageType::float32, affine_from_spacing(g.spacing())));
  CHECK(back.grid.spacing() == Spacing{1.5, 1.5, 3.0});
}

TEST_CASE("gzip files round trip and are smaller for smooth data") {
  ScratchDir dir("niftigz");
  VoxelGrid g(Dims{32, 32, 32}, Spacing{});
  for (std::int64_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>(g.coords(i).z);
  write_nifti(dir / "v.nii.gz", g, StorageType::int16, affine_from_spacing(g.spacing()));
  const auto raw = read_file_bytes(dir / "v.nii.gz");
  CHECK(raw[0] == 0x1f);
  CHECK(raw[1] == 0x8b);
  CHECK(raw.size() < 352 + 2 * 32 * 32 * 32);
  CHECK(read_nifti(dir / "v.nii.gz").grid == g);
  CHECK(gzip_decompress(gzip_compress(raw)) == raw);
}

TEST_CASE("truncated or malformed input") {
  const VoxelGrid g(Dims{4, 4, 4}, Spacing{});
  const auto good = encode_nifti(g, StorageType::int16, affine_from_spacing(g.spacing()));

  auto short_header = std::vector<std::uint8_t>(good.begin(), good.begin() + 200);
  CHECK(code_of(short_header) == Errc::corrupt_header);

  auto short_data = std::vector<std::uint8_t>(good.begin(), good.end() - 10);
  CHECK(code_of(short_data) == Errc::corrupt_header);

  auto bad_magic = good;
  bad_magic[344] = 'x';
  CHECK(code_of(bad_magic) == Errc::corrupt_header);

  auto two_file = good;
  std::memcpy(two_file.data() + 344, "ni1\0", 4);
  CHECK(code_of(two_file) == Errc::unsupported_format);

  auto float64 = good;
  const std::int16_t dt = 64;
  std::memcpy(float64.data() + 70, &dt, 2);
  CHECK(code_of(float64) == Errc::unsupported_datatype);

  auto zero_pixdim = good;
  const float zero = 0.0f;
  std::memcpy(zero_pixdim.data() + 80, &zero, 4);
  CHECK(code_of(zero_pixdim) == Errc::invalid_geometry);

  const auto gz = gzip_compress(good);
  CHECK(code_of(std::vector<std::uint8_t>(gz.begin(), gz.begin() + static_cast<long>(gz.size() / 2))) ==
        Errc::corrupt_header);
}

TEST_CASE("scl_slope and scl_inter are applied") {
  VoxelGrid g(Dims{2, 1, 1}, Spacing{});
  g[0] = 10.0f;
  g[1] = -4.0f;
  auto bytes = encode_nifti(g, StorageType::int16, affine_from_spacing(g.spacing()));
  const float slope = 2.0f, inter = -1024.0f;
  std::memcpy(bytes.data() + 112, &slope, 4);
  std::memcpy(bytes.data() + 116, &inter, 4);
  const NiftiImage img = decode_nifti(bytes);
  CHECK(img.grid[0] == -1004.0f);
  CHECK(img.grid[1] == -1032.0f);
}

TEST_CASE("volumes clamp to the HU range and masks reject foreign labels") {
  ScratchDir dir("niftiio");
  VoxelGrid g(Dims{3, 1, 1}, Spacing{});
  g[0] = -3000.0f;
  g[1] = 5000.0f;
  g[2] = 40.0f;
  write_nifti(dir / "ct.nii", g, StorageType::float32, affine_from_spacing(g.spacing()));
  const CtVolume ct = read_volume(dir / "ct.nii");
  CHECK(ct.grid[0] == CtVolume::kMinHu);
  CHECK(ct.grid[1] == CtVolume::kMaxHu);
  CHECK(ct.grid[2] == 40.0f);

  VoxelGrid labels(Dims{3, 1, 1}, Spacing{});
  labels[1] = 2.0f;
  write_nifti(dir / "ok.nii.gz", labels, StorageType::uint8, affine_from_spacing(labels.spacing()));
  CHECK(read_mask(dir / "ok.nii.gz").select(LabelMask::kTumor).count() == 1);
  labels[2] = 5.0f;
  write_nifti(dir / "bad.nii.gz", labels, StorageType::uint8, affine_from_spacing(labels.spacing()));
  CHECK_THROWS_AS(read_mask(dir / "bad.nii.gz"), Error);
}

TEST_CASE("missing file is an io error") {
  try {
    read_nifti("/nonexistent/volume.nii.gz");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

}
