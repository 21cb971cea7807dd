#include "relight/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace relight::nn {

namespace {

constexpr char kMagic[8] = {'R', 'L', 'C', 'K', 'P', 'T', '0', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

const CheckpointTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const CheckpointTensor& Checkpoint::at(const std::string& name) const {
  const CheckpointTensor* t = find(name);
  if (!t) throw ValidationError("checkpoint has no tensor '" + name + "'");
  return *t;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  nlohmann::json table = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : c.tensors) {
    if (t.data.size() != numel(t.shape)) {
      throw ValidationError("checkpoint tensor '" + t.name + "' size/shape mismatch");
    }
    table.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.data.size();
  }
  const nlohmann::json header = {{"format", "relight-checkpoint"},
                                 {"format_version", kCheckpointVersion},
                                 {"dtype", "float32le"},
                                 {"meta", c.meta},
                                 {"tensors", table}};
  const std::string hs = header.dump();
  std::vector<std::uint8_t> out(kMagic, kMagic + sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(hs.size()));
  out.insert(out.end(), hs.begin(), hs.end());
  out.reserve(out.size() + 4 * offset);
  for (const auto& t : c.tensors) {
    for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kMagic + 4 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("not a checkpoint file", 0);
  }
  const std::size_t hlen = get_u32(bytes.data() + sizeof kMagic);
  const std::size_t hoff = sizeof kMagic + 4;
  if (hoff + hlen > bytes.size()) throw ParseError("truncated checkpoint header", hoff);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(hoff),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(hoff + hlen));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad checkpoint header: ") + e.what(), hoff + e.byte);
  }
  if (header.value("format_version", 0) != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " +
                          header.value("format_version", nlohmann::json(0)).dump());
  }
  Checkpoint c;
  c.meta = header.at("meta");
  const std::size_t poff = hoff + hlen;
  for (const auto& e : header.at("tensors")) {
    CheckpointTensor t;
    t.name = e.at("name").get<std::string>();
    t.shape = e.at("shape").get<Shape>();
    const std::size_t off = e.at("offset").get<std::size_t>();
    const std::size_t n = numel(t.shape);
    if (poff + 4 * (off + n) > bytes.size()) {
      throw ParseError("checkpoint payload truncated in '" + t.name + "'", poff + 4 * off);
    }
    t.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      t.data[i] = std::bit_cast<float>(get_u32(bytes.data() + poff + 4 * (off + i)));
    }
    c.tensors.push_back(std::move(t));
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const auto bytes = encode_checkpoint(c);
  // Write-then-rename so an interrupted save never leaves a torn file.
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot write " + tmp);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

template <typename T>
void append_params(Checkpoint& c, const std::string& prefix, const std::vector<NamedParam<T>>& ps) {
  for (const auto& p : ps) {
    CheckpointTensor t{prefix + p.name, p.tensor.shape(), {}};
    t.data.assign(p.tensor.data().begin(), p.tensor.data().end());
    c.tensors.push_back(std::move(t));
  }
}

template <typename T>
void load_params(const Checkpoint& c, const std::string& prefix, std::vector<NamedParam<T>>& ps) {
  for (auto& p : ps) {
    const CheckpointTensor& t = c.at(prefix + p.name);
    if (t.shape != p.tensor.shape()) {
      throw ValidationError("checkpoint tensor '" + t.name + "' has shape " + shape_str(t.shape) +
                            ", model expects " + shape_str(p.tensor.shape()));
    }
    std::vector<T>& dst = p.tensor.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(t.data[i]);
  }
}

template void append_params(Checkpoint&, const std::string&, const std::vector<NamedParam<float>>&);
template void append_params(Checkpoint&, const std::string&, const std::vector<NamedParam<double>>&);
template void load_params(const Checkpoint&, const std::string&, std::vector<NamedParam<float>>&);
template void load_params(const Checkpoint&, const std::string&, std::vector<NamedParam<double>>&);

}  // namespace relight::nn
