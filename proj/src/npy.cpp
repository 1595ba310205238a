#include "calred/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace calred {

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace {

constexpr char kMagic[] = "\x93NUMPY";

std::string header_dict(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << "{'descr': '<f4', 'fortran_order': False, 'shape': (" << rows << ", " << cols << "), }";
  std::string dict = os.str();
  // magic(6) + version(2) + length(2) + dict + padding + '\n' is a multiple of 64.
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');
  return dict;
}

}  // namespace

std::string encode_npy_f32(const ImageXd& a) {
  const std::string dict = header_dict(a.rows(), a.cols());
  std::string out(kMagic, 6);
  out.push_back('\x01');
  out.push_back('\x00');
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.push_back(static_cast<char>(len & 0xff));
  out.push_back(static_cast<char>(len >> 8));
  out += dict;
  const std::size_t offset = out.size();
  out.resize(offset + static_cast<std::size_t>(a.size()) * sizeof(float));
  char* dst = out.data() + offset;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const float v = static_cast<float>(a(r, c));
      std::memcpy(dst, &v, sizeof v);
      dst += sizeof v;
    }
  return out;
}

ImageXd decode_npy(const std::string& bytes, const std::string& origin) {
  auto fail = [&](const std::string& why) { return IoError(origin + ": " + why); };
  if (bytes.size() < 10 || bytes.compare(0, 6, kMagic, 6) != 0) throw fail("not an NPY file");
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t header_start = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    header_start = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw fail("truncated header");
    for (int i = 0; i < 4; ++i) header_len |= static_cast<std::size_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
    header_start = 12;
  } else {
    throw fail("unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < header_start + header_len) throw fail("truncated header");
  const std::string header = bytes.substr(header_start, header_len);

  std::smatch m;
  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(\s*(\d+)\s*,\s*(\d+)\s*,?\s*\))");
  if (!std::regex_search(header, m, descr_re)) throw fail("header has no descr");
  const std::string descr = m[1];
  if (!std::regex_search(header, m, order_re)) throw fail("header has no fortran_order");
  const bool fortran = m[1] == "True";
  if (!std::regex_search(header, m, shape_re)) throw fail("expected a 2-D shape");
  const auto rows = static_cast<Eigen::Index>(std::stoll(m[1]));
  const auto cols = static_cast<Eigen::Index>(std::stoll(m[2]));

  std::size_t width = 0;
  if (descr == "<f4") {
    width = 4;
  } else if (descr == "<f8") {
    width = 8;
  } else {
    throw fail("unsupported dtype '" + descr + "' (expected '<f4' or '<f8')");
  }
  const std::size_t data_start = header_start + header_len;
  const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (bytes.size() != data_start + count * width) throw fail("payload size does not match shape");

  ImageXd out(rows, cols);
  const char* src = bytes.data() + data_start;
  for (std::size_t k = 0; k < count; ++k) {
    double v = 0;
    if (width == 4) {
      float f = 0;
      std::memcpy(&f, src + 4 * k, 4);
      v = f;
    } else {
      std::memcpy(&v, src + 8 * k, 8);
    }
    const auto major_idx = static_cast<Eigen::Index>(k);
    if (fortran) {
      out(major_idx % rows, major_idx / rows) = v;
    } else {
      out(major_idx / cols, major_idx % cols) = v;
    }
  }
  return out;
}

void write_npy(const std::filesystem::path& path, const ImageXd& a) { write_file_atomic(path, encode_npy_f32(a)); }

ImageXd read_npy(const std::filesystem::path& path) { return decode_npy(read_file(path), path.string()); }

ImageXd quantize_f32(const ImageXd& a) { return a.cast<float>().cast<double>(); }

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + tmp.string() + "' for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

}  // namespace calred
