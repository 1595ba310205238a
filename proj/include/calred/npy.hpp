#pragma once

#include "calred/types.hpp"

#include <filesystem>
#include <string>

namespace calred {

// NPY v1.0 reader/writer for 2-D arrays.
//
// Writing always produces little-endian float32 ('<f4'), C order. Reading
// accepts '<f4' and '<f8' in either order.

/// Serialised bytes of a v1.0 '<f4' C-order file.
std::string encode_npy_f32(const ImageXd& a);
ImageXd decode_npy(const std::string& bytes, const std::string& origin = "<memory>");

void write_npy(const std::filesystem::path& path, const ImageXd& a);
ImageXd read_npy(const std::filesystem::path& path);

/// Round-trip through float32, i.e. what a reader of write_npy() will see.
ImageXd quantize_f32(const ImageXd& a);

// File helpers shared by the CLI and the external denoiser client.

/// Writes via a temporary sibling and rename(), so readers never see a
/// truncated file.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace calred
