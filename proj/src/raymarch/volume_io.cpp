#include <bit>
#include <cstring>
#include <string>

#include "relight/raymarch/raymarch.hpp"

namespace relight::raymarch {

namespace {

constexpr char kMagic[8] = {'E', 'P', 'V', 'O', 'L', '0', '1', '\n'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_volume(const EpipolarVolume& vol, const RayMarchConfig& cfg) {
  nlohmann::json header = {{"width", vol.width()},
                           {"height", vol.height()},
                           {"steps", vol.steps()},
                           {"layout", "CZHW"},
                           {"channels", {"R", "G", "B", "ratio"}},
                           {"dtype", "float32le"},
                           {"mask", "uint8 ZHW"},
                           {"config", cfg}};
  const std::string hs = header.dump();
  std::vector<std::uint8_t> out(kMagic, kMagic + sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(hs.size()));
  out.insert(out.end(), hs.begin(), hs.end());
  for (float f : vol.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
  out.insert(out.end(), vol.mask().begin(), vol.mask().end());
  return out;
}

EpipolarVolume decode_volume(const std::vector<std::uint8_t>& bytes, RayMarchConfig* cfg_out) {
  if (bytes.size() < sizeof kMagic + 4 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("not an epipolar volume", 0);
  }
  const std::size_t hlen = get_u32(bytes, sizeof kMagic);
  const std::size_t hoff = sizeof kMagic + 4;
  if (hoff + hlen > bytes.size()) throw ParseError("truncated volume header", hoff);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(hoff),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(hoff + hlen));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad volume header: ") + e.what(), hoff + e.byte);
  }
  EpipolarVolume vol(header.at("width").get<int>(), header.at("height").get<int>(),
                     header.at("steps").get<int>());
  const std::size_t n = vol.data().size();
  const std::size_t poff = hoff + hlen;
  if (bytes.size() != poff + 4 * n + vol.mask().size()) {
    throw ParseError("volume payload size mismatch", poff);
  }
  for (std::size_t i = 0; i < n; ++i) {
    vol.data()[i] = std::bit_cast<float>(get_u32(bytes, poff + 4 * i));
  }
  std::memcpy(vol.mask().data(), bytes.data() + poff + 4 * n, vol.mask().size());
  if (cfg_out) *cfg_out = header.at("config").get<RayMarchConfig>();
  return vol;
}

}  // namespace relight::raymarch
