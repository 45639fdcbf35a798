#include <doctest.h>

#include <fstream>
#include <string>

#include "scratch_dir.hpp"
#include "tumorsynth/error.hpp"
#include "tumorsynth/hash.hpp"

using namespace tumorsynth;

TEST_SUITE("hash") {

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string abc = "abc";
  CHECK(sha256_hex({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()}) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("file hash equals buffer hash") {
  ScratchDir dir("hash");
  std::string data(100000, '\0');
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<char>(i * 31 % 251);
  std::ofstream(dir / "f.bin", std::ios::binary) << data;
  CHECK(sha256_file(dir / "f.bin") ==
        sha256_hex({reinterpret_cast<const std::uint8_t*>(data.data()), data.size()}));
  CHECK_THROWS_AS(sha256_file(dir / "missing"), Error);
}

}
