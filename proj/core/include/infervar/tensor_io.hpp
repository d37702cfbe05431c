#pragma once

#include <filesystem>
#include <string>

#include "infervar/tensor.hpp"

namespace infervar {

// TEN1 layout: magic "TEN1", u32 LE rank, rank x u32 LE dims, f32 LE payload
// in row-major order. Image tensors are written with rank 3 (H, W, C); rank 2
// files are read as single-channel images.

void write_ten1(const std::filesystem::path& path, const ImageTensor& tensor);
ImageTensor read_ten1(const std::filesystem::path& path);

std::string encode_ten1(const ImageTensor& tensor);
ImageTensor decode_ten1(const std::string& bytes);

/// 8-bit grayscale/RGB(A) PNG, normalized to [0, 1]. Alpha is dropped.
ImageTensor read_png(const std::filesystem::path& path);
/// Writes a 1- or 3-channel tensor clamped to [0, 1] as an 8-bit PNG.
void write_png(const std::filesystem::path& path, const ImageTensor& tensor);

/// Binary (P5) or ASCII (P2) PGM with maxval <= 65535, normalized to [0, 1].
ImageTensor read_pgm(const std::filesystem::path& path);

/// Dispatches on extension: .png, .pgm, anything else as TEN1.
ImageTensor read_image(const std::filesystem::path& path);

}  // namespace infervar
