#include "ncomp/compressor.hpp"

#include <cmath>
#include <stdexcept>

#include "ncomp/errors.hpp"
#include "ncomp/range_coder.hpp"

namespace ncomp {
namespace {

constexpr char kMagic[4] = {'N', 'C', 'Z', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kFlagPos = 0x01;

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v) | 0x80);
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

struct ParsedContainer {
  ContainerHeader header;
  std::span<const std::uint8_t> payload;
};

ParsedContainer parse_container(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const auto u8 = [&]() {
    if (pos >= bytes.size()) throw FormatError("container truncated");
    return bytes[pos++];
  };
  for (char m : kMagic) {
    if (static_cast<char>(u8()) != m) throw FormatError("not a compressed container (bad magic)");
  }
  ParsedContainer out;
  out.header.version = u8();
  if (out.header.version != kVersion) {
    throw FormatError("unsupported container version " + std::to_string(out.header.version));
  }
  const std::uint8_t flags = u8();
  if ((flags & ~kFlagPos) != 0) throw FormatError("container has unknown flag bits set");
  out.header.pos_enabled = (flags & kFlagPos) != 0;
  std::uint32_t checksum = 0;
  for (int i = 0; i < 4; ++i) checksum |= static_cast<std::uint32_t>(u8()) << (8 * i);
  out.header.model_checksum = checksum;
  std::uint64_t len = 0;
  for (int shift = 0;; shift += 7) {
    if (shift > 63) throw FormatError("container length varint too long");
    const std::uint8_t b = u8();
    len |= static_cast<std::uint64_t>(b & 0x7F) << shift;
    if ((b & 0x80) == 0) break;
  }
  out.header.original_length = len;
  out.payload = bytes.subspan(pos);
  return out;
}

// Model-driven prediction state shared by compress and decompress: the
// decoded-so-far prefix is enough to rebuild the next context and tags.
class PredictionContext {
 public:
  PredictionContext(const NetworkParams& params, const LexiconTagger& tagger, PosMode pos)
      : params_(&params), pos_(pos), inc_(tagger),
        ctx_(params.config.window, 0), ctx_tags_(params.config.window, 0) {}

  QuantizedPmf next_pmf(std::span<const std::uint8_t> prefix) {
    const std::size_t window = params_->config.window;
    const std::size_t n = prefix.size();
    for (std::size_t t = 0; t < window; ++t) {
      const std::size_t back = window - t;  // ctx_[t] is the byte back positions ago
      if (n >= back) {
        ctx_[t] = prefix[n - back];
        ctx_tags_[t] = pos_ == PosMode::enabled ? inc_.tags()[n - back] : 0;
      } else {
        ctx_[t] = 0;
        ctx_tags_[t] = 0;
      }
    }
    const Pmf pmf = forward_infer(*params_, ctx_, ctx_tags_, pos_);
    return quantize_pmf(pmf);
  }

  void advance(std::uint8_t byte) {
    if (pos_ == PosMode::enabled) inc_.push(byte);
  }

 private:
  const NetworkParams* params_;
  PosMode pos_;
  IncrementalTagger inc_;
  std::vector<std::uint8_t> ctx_;
  std::vector<std::uint8_t> ctx_tags_;
};

double ideal_bits(const QuantizedPmf& pmf, std::uint8_t symbol) {
  return -std::log2(static_cast<double>(pmf.freq(symbol)) / static_cast<double>(pmf.total()));
}

}  // namespace

std::vector<std::uint8_t> compress(std::span<const std::uint8_t> text,
                                   const NetworkParams& params, std::uint32_t model_checksum,
                                   const LexiconTagger& tagger, PosMode pos,
                                   CompressionStats* stats, const PmfProbe& probe) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(pos == PosMode::enabled ? kFlagPos : 0);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(model_checksum >> (8 * i)));
  put_varint(out, text.size());

  double ideal = 0.0;
  std::size_t payload_bits = 0;
  if (!text.empty()) {
    PredictionContext ctx(params, tagger, pos);
    BitWriter bits;
    RangeEncoder enc(bits);
    for (std::size_t i = 0; i < text.size(); ++i) {
      const QuantizedPmf pmf = ctx.next_pmf(text.first(i));
      if (probe) probe(i, pmf);
      enc.encode(pmf, text[i]);
      ideal += ideal_bits(pmf, text[i]);
      ctx.advance(text[i]);
    }
    enc.finish();
    payload_bits = bits.bit_count();
    const std::vector<std::uint8_t> payload = bits.take_bytes();
    out.insert(out.end(), payload.begin(), payload.end());
  }

  if (stats != nullptr) {
    stats->input_bytes = text.size();
    stats->output_bytes = out.size();
    stats->payload_bits = payload_bits;
    stats->bpc = text.empty() ? 0.0
                              : static_cast<double>(payload_bits) /
                                    static_cast<double>(text.size());
    stats->ideal_bpc = text.empty() ? 0.0 : ideal / static_cast<double>(text.size());
  }
  return out;
}

std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> container,
                                     const NetworkParams& params,
                                     std::uint32_t model_checksum, const LexiconTagger& tagger,
                                     const PmfProbe& probe) {
  const ParsedContainer parsed = parse_container(container);
  if (parsed.header.model_checksum != model_checksum) {
    throw ChecksumError("container was written with a different model (checksum mismatch)");
  }
  const std::uint64_t n = parsed.header.original_length;
  std::vector<std::uint8_t> text;
  if (n == 0) return text;
  text.reserve(n);

  const PosMode pos = parsed.header.pos_enabled ? PosMode::enabled : PosMode::ablated;
  PredictionContext ctx(params, tagger, pos);
  BitReader bits(parsed.payload);
  RangeDecoder dec(bits);
  for (std::uint64_t i = 0; i < n; ++i) {
    const QuantizedPmf pmf = ctx.next_pmf(text);
    if (probe) probe(i, pmf);
    const std::uint8_t sym = static_cast<std::uint8_t>(dec.decode(pmf));
    text.push_back(sym);
    ctx.advance(sym);
  }
  return text;
}

CompressionStats evaluate_bpc(std::span<const std::uint8_t> text, const NetworkParams& params,
                              const LexiconTagger& tagger, PosMode pos) {
  CompressionStats stats;
  compress(text, params, 0, tagger, pos, &stats);
  return stats;
}

Order0Model::Order0Model() : total_(kAlphabetSize) { counts_.fill(1); }

QuantizedPmf Order0Model::pmf() const { return QuantizedPmf::from_counts(counts_); }

void Order0Model::update(std::uint8_t symbol) {
  ++counts_[symbol];
  ++total_;
  if (total_ > kMaxFreqTotal) {
    total_ = 0;
    for (std::uint32_t& c : counts_) {
      c = (c + 1) / 2;
      total_ += c;
    }
  }
}

CompressionStats baseline_order0(std::span<const std::uint8_t> text) {
  CompressionStats stats;
  stats.input_bytes = text.size();
  if (text.empty()) return stats;

  Order0Model model;
  BitWriter bits;
  RangeEncoder enc(bits);
  double ideal = 0.0;
  for (const std::uint8_t b : text) {
    const QuantizedPmf pmf = model.pmf();
    enc.encode(pmf, b);
    ideal += ideal_bits(pmf, b);
    model.update(b);
  }
  enc.finish();
  stats.payload_bits = bits.bit_count();
  stats.output_bytes = bits.take_bytes().size();
  stats.bpc = static_cast<double>(stats.payload_bits) / static_cast<double>(text.size());
  stats.ideal_bpc = ideal / static_cast<double>(text.size());
  return stats;
}

}  // namespace ncomp
