#include "support.hpp"

#include "calred/npy.hpp"

#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <unistd.h>

using namespace calred;
using calred::test::random_image;

namespace {

// Builds an NPY file by hand.
std::string make_npy(const std::string& dict, const std::string& payload, int major = 1) {
  std::string magic = std::string("\x93NUMPY", 6) + static_cast<char>(major) + '\0';
  const std::size_t len_bytes = major == 1 ? 2 : 4;
  std::string header = dict;
  while ((magic.size() + len_bytes + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::string len(len_bytes, '\0');
  for (std::size_t i = 0; i < len_bytes; ++i) len[i] = static_cast<char>((header.size() >> (8 * i)) & 0xff);
  return magic + len + header + payload;
}

template <typename T>
std::string raw(std::initializer_list<T> values) {
  std::string out;
  for (T v : values) out.append(reinterpret_cast<const char*>(&v), sizeof v);
  return out;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("calred-npy-test-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("encoded header follows the v1.0 layout") {
  ImageXd a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const std::string bytes = encode_npy_f32(a);
  REQUIRE(bytes.size() > 10);
  CHECK(bytes.compare(0, 6, "\x93NUMPY") == 0);
  CHECK(bytes[6] == 1);
  CHECK(bytes[7] == 0);
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
  CHECK((10 + header_len) % 64 == 0);
  const std::string header = bytes.substr(10, header_len);
  CHECK(header.find("'descr': '<f4'") != std::string::npos);
  CHECK(header.find("'fortran_order': False") != std::string::npos);
  CHECK(header.find("'shape': (2, 3)") != std::string::npos);
  CHECK(header.back() == '\n');
  CHECK(bytes.substr(10 + header_len) == raw<float>({1, 2, 3, 4, 5, 6}));
}

TEST_CASE("round trip equals the float32 quantisation") {
  const ImageXd a = random_image(13, 1);
  CHECK(decode_npy(encode_npy_f32(a)) == quantize_f32(a));
  CHECK(encode_npy_f32(decode_npy(encode_npy_f32(a))) == encode_npy_f32(a));
}

TEST_CASE("reads <f8 and Fortran order") {
  const std::string c_order =
      make_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), }", raw<double>({1, 2, 3, 4}));
  const std::string f_order =
      make_npy("{'descr': '<f8', 'fortran_order': True, 'shape': (2, 2), }", raw<double>({1, 3, 2, 4}));
  ImageXd expected(2, 2);
  expected << 1, 2, 3, 4;
  CHECK(decode_npy(c_order) == expected);
  CHECK(decode_npy(f_order) == expected);
}

TEST_CASE("reads version 2 headers") {
  const std::string v2 =
      make_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2), }", raw<float>({0.5f, -2.0f}), 2);
  ImageXd expected(1, 2);
  expected << 0.5, -2.0;
  CHECK(decode_npy(v2) == expected);
}

TEST_CASE("rejects malformed files") {
  const std::string dict2 = "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2), }";
  CHECK_THROWS_AS(decode_npy("not an npy file"), IoError);
  CHECK_THROWS_AS(decode_npy(make_npy(dict2, raw<float>({1, 2, 3}))), IoError);
  CHECK_THROWS_AS(decode_npy(make_npy("{'descr': '>f4', 'fortran_order': False, 'shape': (1, 1), }", raw<float>({1}))),
                  IoError);
  CHECK_THROWS_AS(
      decode_npy(make_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (1, 1, 1), }", raw<float>({1}))),
      IoError);
  CHECK_THROWS_AS(decode_npy(make_npy("{'descr': '<i4', 'fortran_order': False, 'shape': (1, 1), }",
                                      raw<std::int32_t>({1}))),
                  IoError);
}

TEST_CASE("atomic writes replace files and leave no temporaries") {
  TempDir tmp;
  const auto path = tmp.path / "a.npy";
  write_npy(path, ImageXd::Ones(3, 3));
  write_npy(path, ImageXd::Zero(4, 4));
  CHECK(read_npy(path) == ImageXd::Zero(4, 4));
  int entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(tmp.path)) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("I/O errors") {
  CHECK_THROWS_AS(read_npy("/nonexistent/dir/a.npy"), IoError);
  CHECK_THROWS_AS(write_npy("/nonexistent/dir/a.npy", ImageXd::Zero(2, 2)), IoError);
}
