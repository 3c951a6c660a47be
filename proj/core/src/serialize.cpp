#include "ncomp/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ncomp/crc32.hpp"
#include "ncomp/errors.hpp"

namespace ncomp {
namespace {

constexpr char kMagic[4] = {'N', 'C', 'M', 'P'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("model file truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> serialize_body(const NetworkParams& params) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  const ModelConfig& c = params.config;
  put_u32(out, c.window);
  put_u32(out, c.char_alphabet);
  put_u32(out, c.tag_alphabet);
  put_u32(out, c.char_gru_units);
  put_u32(out, c.pos_gru_units);
  put_u32(out, c.merged_gru_units);
  put_u32(out, c.dense1_units);
  put_u64(out, std::bit_cast<std::uint64_t>(c.dropout_rho));
  put_u64(out, c.seed);
  for_each_tensor(
      [&out](const auto& tensor) {
        for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
          for (Eigen::Index col = 0; col < tensor.cols(); ++col) {
            put_f64(out, tensor(r, col));
          }
        }
      },
      params);
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const NetworkParams& params) {
  std::vector<std::uint8_t> out = serialize_body(params);
  put_u32(out, crc32(out));
  return out;
}

std::uint32_t model_checksum(const NetworkParams& params) {
  return crc32(serialize_body(params));
}

void save_model(const NetworkParams& params, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_model(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open model file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing model file: " + path);
}

LoadedModel parse_model(std::span<const std::uint8_t> bytes) {
  Cursor cur(bytes);
  char magic[4];
  for (char& m : magic) m = static_cast<char>(cur.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a model file (bad magic)");
  const std::uint8_t version = cur.u8();
  if (version != kVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }

  ModelConfig cfg;
  cfg.window = cur.u32();
  cfg.char_alphabet = cur.u32();
  cfg.tag_alphabet = cur.u32();
  cfg.char_gru_units = cur.u32();
  cfg.pos_gru_units = cur.u32();
  cfg.merged_gru_units = cur.u32();
  cfg.dense1_units = cur.u32();
  cfg.dropout_rho = cur.f64();
  cfg.seed = cur.u64();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model file config invalid: ") + e.what());
  }

  // Exact length check before touching weights: config determines the
  // tensor payload size completely.
  NetworkParams params = init_params(cfg);
  std::size_t weight_count = 0;
  for_each_tensor([&weight_count](const auto& t) { weight_count += t.size(); }, params);
  if (cur.remaining() != weight_count * 8 + 4) {
    throw FormatError("model file truncated or oversized (expected " +
                      std::to_string(weight_count * 8 + 4) + " more bytes, have " +
                      std::to_string(cur.remaining()) + ")");
  }

  const std::uint32_t expected = crc32(bytes.first(bytes.size() - 4));
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
  }
  if (stored != expected) throw ChecksumError("model file checksum mismatch");

  for_each_tensor(
      [&cur](auto& tensor) {
        for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
          for (Eigen::Index col = 0; col < tensor.cols(); ++col) {
            tensor(r, col) = cur.f64();
          }
        }
        if (!tensor.allFinite()) throw FormatError("model file holds non-finite weights");
      },
      params);
  return {std::move(params), stored};
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw Error("failed reading model file: " + path);
  return parse_model(bytes);
}

}  // namespace ncomp
