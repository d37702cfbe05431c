#include "infervar/tensor_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "infervar/error.hpp"

namespace infervar {

namespace {

constexpr char kMagic[4] = {'T', 'E', 'N', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + b])) << (8 * b);
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string encode_ten1(const ImageTensor& tensor) {
  std::string out(kMagic, 4);
  put_u32(out, 3);
  put_u32(out, static_cast<std::uint32_t>(tensor.height()));
  put_u32(out, static_cast<std::uint32_t>(tensor.width()));
  put_u32(out, static_cast<std::uint32_t>(tensor.channels()));
  out.reserve(out.size() + 4 * tensor.size());
  for (double v : tensor.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

ImageTensor decode_ten1(const std::string& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("not a TEN1 tensor (bad magic)");
  }
  const std::uint32_t rank = get_u32(bytes, 4);
  if (rank < 1 || rank > 3) throw IoError("unsupported TEN1 rank " + std::to_string(rank));
  if (bytes.size() < 8 + 4ull * rank) throw IoError("truncated TEN1 header");
  std::size_t dims[3] = {1, 1, 1};
  // rank 1 is a 1 x N row; rank 2 is H x W single-channel.
  for (std::uint32_t r = 0; r < rank; ++r) dims[r + (rank == 1 ? 1 : 0)] = get_u32(bytes, 8 + 4 * r);
  const Shape shape{dims[0], dims[1], dims[2]};
  const std::size_t header = 8 + 4 * rank;
  if (bytes.size() != header + 4 * shape.size()) {
    throw IoError("TEN1 payload size does not match dims " + to_string(shape));
  }
  std::vector<double> data(shape.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, header + 4 * i)));
  try {
    return ImageTensor(shape, std::move(data));
  } catch (const ValidationError& e) {
    throw IoError(std::string("invalid TEN1 tensor: ") + e.what());
  }
}

void write_ten1(const std::filesystem::path& path, const ImageTensor& tensor) {
  write_file(path, encode_ten1(tensor));
}

ImageTensor read_ten1(const std::filesystem::path& path) {
  try {
    return decode_ten1(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

ImageTensor read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG '" + path.string() + "': " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path.string() + "': " + message);
  }
  const Shape shape{image.height, image.width, color ? 3u : 1u};
  std::vector<double> data(buffer.size());
  std::transform(buffer.begin(), buffer.end(), data.begin(),
                 [](png_byte b) { return static_cast<double>(b) / 255.0; });
  return ImageTensor(shape, std::move(data));
}

void write_png(const std::filesystem::path& path, const ImageTensor& tensor) {
  if (tensor.channels() != 1 && tensor.channels() != 3) {
    throw ValidationError("PNG export needs 1 or 3 channels, got " + to_string(tensor.shape()));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(tensor.width());
  image.height = static_cast<png_uint_32>(tensor.height());
  image.format = tensor.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(tensor.size());
  std::transform(tensor.values().begin(), tensor.values().end(), buffer.begin(), [](double v) {
    return static_cast<png_byte>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

ImageTensor read_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw IoError("truncated PGM header in '" + path.string() + "'");
    return bytes.substr(start, pos - start);
  };
  auto next_number = [&]() -> std::size_t {
    const std::string tok = next_token();
    try {
      return static_cast<std::size_t>(std::stoul(tok));
    } catch (const std::exception&) {
      throw IoError("bad PGM number '" + tok + "' in '" + path.string() + "'");
    }
  };

  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2") throw IoError("'" + path.string() + "' is not a PGM file");
  const std::size_t width = next_number();
  const std::size_t height = next_number();
  const std::size_t maxval = next_number();
  if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
    throw IoError("bad PGM header in '" + path.string() + "'");
  }
  std::vector<double> data(width * height);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (double& v : data) v = static_cast<double>(next_number()) * scale;
  } else {
    ++pos;  // single whitespace after maxval
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + data.size() * bpp) throw IoError("truncated PGM payload in '" + path.string() + "'");
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * bpp);
      const unsigned raw = bpp == 2 ? (static_cast<unsigned>(p[0]) << 8) | p[1] : p[0];
      data[i] = static_cast<double>(raw) * scale;
    }
  }
  return ImageTensor(Shape{height, width, 1}, std::move(data));
}

ImageTensor read_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  return read_ten1(path);
}

}  // namespace infervar
