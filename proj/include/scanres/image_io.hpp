#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scanres/image.hpp"

namespace scanres {

// Loads an 8-bit grayscale or RGB(A) PNG, or a binary (P5) PGM. Color input is
// reduced with to_grayscale(). The file carries no dpi; the caller supplies it.
GrayImage read_image(const std::filesystem::path& path, Dpi dpi = kBaseDpi);

GrayImage decode_pgm(const std::string& bytes, Dpi dpi = kBaseDpi);
std::string encode_pgm(const GrayImage& img);

GrayImage decode_png(const std::string& bytes, Dpi dpi = kBaseDpi);
std::string encode_png(const GrayImage& img);

// Format chosen from the extension (.png or .pgm).
void write_image(const std::filesystem::path& path, const GrayImage& img);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace scanres
