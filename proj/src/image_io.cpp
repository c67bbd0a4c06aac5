#include "scanres/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

namespace scanres {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool has_png_signature(const std::string& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0;
}

// PGM header tokens, skipping '#' comments.
class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    for (;;) {
      while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
      if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) fail(ErrorCode::ParseError, "truncated PGM header");
    return bytes_.substr(start, pos_ - start);
  }

  int integer() {
    std::string t = token();
    try {
      std::size_t used = 0;
      int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "bad PGM header value '" + t + "'");
    }
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoError, "short write to " + path.string());
}

GrayImage decode_pgm(const std::string& bytes, Dpi dpi) {
  PgmHeaderReader header(bytes);
  if (header.token() != "P5") fail(ErrorCode::ParseError, "only binary P5 PGM is supported");
  const int width = header.integer();
  const int height = header.integer();
  const int maxval = header.integer();
  if (width < 1 || height < 1) fail(ErrorCode::InvalidImage, "PGM has empty dimensions");
  if (maxval < 1 || maxval > 255) fail(ErrorCode::ParseError, "only 8-bit PGM is supported");
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() < offset + count) fail(ErrorCode::ParseError, "truncated PGM raster");
  std::vector<std::uint8_t> pixels(bytes.begin() + offset, bytes.begin() + offset + count);
  if (maxval != 255) {
    for (auto& p : pixels) p = static_cast<std::uint8_t>((p * 255 + maxval / 2) / maxval);
  }
  return GrayImage(width, height, dpi, std::move(pixels));
}

std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels().data()), img.pixels().size());
  return out;
}

GrayImage decode_png(const std::string& bytes, Dpi dpi) {
  if (!has_png_signature(bytes)) fail(ErrorCode::ParseError, "not a PNG stream");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(ErrorCode::ParseError, std::string("PNG decode failed: ") + image.message);
  }
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  // Alpha is composited away by requesting a format without an alpha channel.
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(ErrorCode::ParseError, std::string("PNG decode failed: ") + image.message);
  }
  if (!color) return GrayImage(width, height, dpi, std::move(raw));
  RgbImage rgb(width, height);
  auto px = rgb.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = {raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]};
  return to_grayscale(rgb, dpi);
}

std::string encode_png(const GrayImage& img) {
  if (img.empty()) fail(ErrorCode::InvalidImage, "cannot encode an empty image");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.pixels().data(), 0, nullptr)) {
    fail(ErrorCode::IoError, std::string("PNG encode failed: ") + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels().data(), 0, nullptr)) {
    fail(ErrorCode::IoError, std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

GrayImage read_image(const std::filesystem::path& path, Dpi dpi) {
  const std::string bytes = read_file(path);
  if (has_png_signature(bytes)) return decode_png(bytes, dpi);
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pgm(bytes, dpi);
  fail(ErrorCode::ParseError, "unrecognized image format: " + path.string());
}

void write_image(const std::filesystem::path& path, const GrayImage& img) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_file(path, encode_png(img));
  } else if (ext == ".pgm") {
    write_file(path, encode_pgm(img));
  } else {
    fail(ErrorCode::InvalidParameter, "unsupported output extension '" + ext + "' (use .png or .pgm)");
  }
}

}  // namespace scanres
