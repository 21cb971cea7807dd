#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "relight/raster/image.hpp"

namespace relight {

enum class ImageKind { color, depth, shadow };
enum class ImageFormat { pfm, png };

using AnyImage = std::variant<ColorImage, DepthMap, ShadowImage>;

/// PNG (8/16-bit) for color/shadow, PFM for any kind. PNG values are sRGB
/// decoded to linear; PFM payloads are taken verbatim.
AnyImage read_image(const std::filesystem::path& path, ImageKind kind);
ColorImage read_color(const std::filesystem::path& path);
DepthMap read_depth(const std::filesystem::path& path);
ShadowImage read_shadow(const std::filesystem::path& path);

/// PNG output clamps to [0,1] and encodes sRGB (8-bit). Depth is PFM only.
void write_image(const ColorImage& img, const std::filesystem::path& path, ImageFormat format);
void write_image(const DepthMap& img, const std::filesystem::path& path, ImageFormat format);
void write_image(const ShadowImage& img, const std::filesystem::path& path, ImageFormat format);

/// In-memory codecs used by the file functions and the HTTP service.
std::vector<std::uint8_t> encode_pfm(const Raster<float>& img);
Raster<float> decode_pfm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const Raster<float>& linear);
/// Returns linear values in [0,1] with the file's channel count (1 or 3).
Raster<float> decode_png(const std::vector<std::uint8_t>& bytes);

ColorImage color_from_raster(const Raster<float>& r);
ShadowImage shadow_from_raster(const Raster<float>& r);
DepthMap depth_from_raster(const Raster<float>& r);

double srgb_to_linear(double encoded);
double linear_to_srgb(double linear);
std::uint8_t encode_srgb8(double linear);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace relight
