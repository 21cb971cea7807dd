#include "relight/raster/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace relight {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double l) {
  return l <= 0.0031308 ? l * 12.92 : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

std::uint8_t encode_srgb8(double linear) {
  const double clamped = std::clamp(linear, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(linear_to_srgb(clamped) * 255.0));
}

// ---------------------------------------------------------------------------
// PFM

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::string token() {
    while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) ++pos_;
    if (start == pos_) throw ParseError("PFM header truncated", start);
    token_start_ = start;
    return std::string(bytes_.begin() + static_cast<long>(start), bytes_.begin() + static_cast<long>(pos_));
  }

  /// The header ends with exactly one whitespace byte after the scale.
  std::size_t payload_start() {
    if (pos_ >= bytes_.size()) throw ParseError("PFM header missing terminator", pos_);
    return pos_ + 1;
  }

  std::size_t token_start() const { return token_start_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
  std::size_t token_start_ = 0;
};

int parse_dim(const std::string& tok, std::size_t offset) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("PFM dimension '" + tok + "' is not an integer", offset);
  }
  if (used != tok.size() || v <= 0) throw ParseError("PFM dimension '" + tok + "' invalid", offset);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_pfm(const Raster<float>& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw ValidationError("PFM supports 1 or 3 channels, got " + std::to_string(img.channels()));
  }
  std::ostringstream hdr;
  hdr << (img.channels() == 3 ? "PF" : "Pf") << "\n"
      << img.width() << " " << img.height() << "\n"
      << "-1.0\n";
  const std::string h = hdr.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  const std::size_t row = static_cast<std::size_t>(img.width()) * img.channels();
  out.reserve(out.size() + img.size() * 4);
  // PFM scanlines run bottom to top.
  for (int y = img.height() - 1; y >= 0; --y) {
    const float* src = img.data().data() + static_cast<std::size_t>(y) * row;
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(src[i]);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return out;
}

Raster<float> decode_pfm(const std::vector<std::uint8_t>& bytes) {
  HeaderReader rd(bytes);
  const std::string magic = rd.token();
  int channels = 0;
  if (magic == "PF") {
    channels = 3;
  } else if (magic == "Pf") {
    channels = 1;
  } else {
    throw ParseError("bad PFM magic '" + magic + "'", rd.token_start());
  }
  const std::string wtok = rd.token();
  const int width = parse_dim(wtok, rd.token_start());
  const std::string htok = rd.token();
  const int height = parse_dim(htok, rd.token_start());
  const std::string stok = rd.token();
  double scale = 0.0;
  try {
    scale = std::stod(stok);
  } catch (const std::exception&) {
    throw ParseError("PFM scale '" + stok + "' is not a number", rd.token_start());
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw ParseError("PFM scale must be non-zero", rd.token_start());
  const bool little = scale < 0.0;
  const std::size_t start = rd.payload_start();
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  const std::size_t need = row * height * 4;
  if (bytes.size() - std::min(bytes.size(), start) < need) {
    throw ParseError("PFM payload truncated: need " + std::to_string(need) + " bytes", bytes.size());
  }
  std::vector<float> data(row * height);
  for (int y = 0; y < height; ++y) {
    const std::size_t src_row = static_cast<std::size_t>(height - 1 - y);
    for (std::size_t i = 0; i < row; ++i) {
      const std::uint8_t* p = bytes.data() + start + (src_row * row + i) * 4;
      std::uint32_t bits = little ? (std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                                     std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24)
                                  : (std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 |
                                     std::uint32_t(p[1]) << 16 | std::uint32_t(p[0]) << 24);
      data[static_cast<std::size_t>(y) * row + i] = std::bit_cast<float>(bits);
    }
  }
  return Raster<float>(width, height, channels, std::move(data));
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngReadState {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + len > st->bytes->size()) png_error(png, "PNG data truncated");
  std::memcpy(out, st->bytes->data() + st->pos, len);
  st->pos += len;
}

void png_write_mem(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

struct PngLayout {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
};

// Plain C-style routine: libpng reports errors by longjmp, so no object with a
// non-trivial destructor may live in this frame across png calls.
bool png_decode_raw(const std::vector<std::uint8_t>* bytes, std::vector<std::uint8_t>* out,
                    PngLayout* layout, char* err, std::size_t err_len) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  PngReadState st{bytes, 0};
  png_bytep* volatile rows = nullptr;
  if (!info || setjmp(png_jmpbuf(png))) {
    std::snprintf(err, err_len, "corrupt PNG stream near byte %zu", st.pos);
    std::free(rows);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &st, png_read_mem);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // host little endian
  png_read_update_info(png, info);
  layout->width = static_cast<int>(png_get_image_width(png, info));
  layout->height = static_cast<int>(png_get_image_height(png, info));
  layout->channels = png_get_channels(png, info);
  layout->bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out->resize(rowbytes * layout->height);
  rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * layout->height));
  for (int y = 0; y < layout->height; ++y) rows[y] = out->data() + rowbytes * y;
  png_read_image(png, rows);
  std::free(rows);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool png_encode_raw(const std::uint8_t* pixels, int width, int height, int channels,
                    std::vector<std::uint8_t>* out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_mem, png_flush_noop);
  png_set_IHDR(png, info, width, height, 8, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) png_write_row(png, const_cast<png_bytep>(pixels + row * y));
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

Raster<float> decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw ParseError("not a PNG file", 0);
  }
  std::vector<std::uint8_t> buf;
  PngLayout layout;
  char err[128] = {};
  if (!png_decode_raw(&bytes, &buf, &layout, err, sizeof(err))) throw ParseError(err, 0);
  if (layout.channels != 1 && layout.channels != 3) {
    throw ParseError("unsupported PNG channel layout", 0);
  }
  const std::size_t n = static_cast<std::size_t>(layout.width) * layout.height * layout.channels;
  std::vector<float> data(n);
  if (layout.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint16_t v;
      std::memcpy(&v, buf.data() + 2 * i, 2);
      data[i] = static_cast<float>(srgb_to_linear(v / 65535.0));
    }
  } else {
    float lut[256];
    for (int c = 0; c < 256; ++c) lut[c] = static_cast<float>(srgb_to_linear(c / 255.0));
    for (std::size_t i = 0; i < n; ++i) data[i] = lut[buf[i]];
  }
  return Raster<float>(layout.width, layout.height, layout.channels, std::move(data));
}

std::vector<std::uint8_t> encode_png(const Raster<float>& linear) {
  if (linear.channels() != 1 && linear.channels() != 3) {
    throw ValidationError("PNG output supports 1 or 3 channels");
  }
  std::vector<std::uint8_t> codes(linear.size());
  for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = encode_srgb8(linear.data()[i]);
  std::vector<std::uint8_t> out;
  if (!png_encode_raw(codes.data(), linear.width(), linear.height(), linear.channels(), &out)) {
    throw IoError("PNG encoding failed");
  }
  return out;
}

// ---------------------------------------------------------------------------

ColorImage color_from_raster(const Raster<float>& r) {
  if (r.channels() == 3) return ColorImage(r);
  if (r.channels() == 1) {
    Raster<float> rgb(r.width(), r.height(), 3);
    for (int y = 0; y < r.height(); ++y)
      for (int x = 0; x < r.width(); ++x)
        for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = r.at(x, y);
    return ColorImage(std::move(rgb));
  }
  throw ValidationError("color image needs 1 or 3 channels");
}

ShadowImage shadow_from_raster(const Raster<float>& r) {
  if (r.channels() != 1) throw ValidationError("shadow image must be single channel");
  return ShadowImage(r);
}

DepthMap depth_from_raster(const Raster<float>& r) {
  if (r.channels() != 1) throw ValidationError("depth map must be single channel");
  std::vector<double> d(r.data().begin(), r.data().end());
  return DepthMap(r.width(), r.height(), std::move(d));
}

namespace {

bool has_png_signature(const std::vector<std::uint8_t>& b) {
  return b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0;
}

}  // namespace

AnyImage read_image(const fs::path& path, ImageKind kind) {
  const auto bytes = read_file_bytes(path);
  const bool png = has_png_signature(bytes);
  try {
    switch (kind) {
      case ImageKind::color:
        return color_from_raster(png ? decode_png(bytes) : decode_pfm(bytes));
      case ImageKind::shadow:
        return shadow_from_raster(png ? decode_png(bytes) : decode_pfm(bytes));
      case ImageKind::depth:
        if (png) throw ValidationError("depth maps must be PFM");
        return depth_from_raster(decode_pfm(bytes));
    }
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
  throw ValidationError("unknown image kind");
}

ColorImage read_color(const fs::path& path) { return std::get<ColorImage>(read_image(path, ImageKind::color)); }
DepthMap read_depth(const fs::path& path) { return std::get<DepthMap>(read_image(path, ImageKind::depth)); }
ShadowImage read_shadow(const fs::path& path) { return std::get<ShadowImage>(read_image(path, ImageKind::shadow)); }

void write_image(const ColorImage& img, const fs::path& path, ImageFormat format) {
  write_file_bytes(path, format == ImageFormat::pfm ? encode_pfm(img.raster()) : encode_png(img.raster()));
}

void write_image(const ShadowImage& img, const fs::path& path, ImageFormat format) {
  write_file_bytes(path, format == ImageFormat::pfm ? encode_pfm(img.raster()) : encode_png(img.raster()));
}

void write_image(const DepthMap& img, const fs::path& path, ImageFormat format) {
  if (format != ImageFormat::pfm) throw ValidationError("depth maps are written as PFM only");
  const auto src = img.raster().data();
  std::vector<float> f(src.begin(), src.end());
  write_file_bytes(path, encode_pfm(Raster<float>(img.width(), img.height(), 1, std::move(f))));
}

}  // namespace relight
