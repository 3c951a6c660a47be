#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "ncomp/crc32.hpp"
#include "ncomp/errors.hpp"
#include "ncomp/model.hpp"
#include "ncomp/rng.hpp"
#include "ncomp/serialize.hpp"

using namespace ncomp;

namespace {

ModelConfig small_config(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.window = 4;
  cfg.char_gru_units = 3;
  cfg.pos_gru_units = 2;
  cfg.merged_gru_units = 3;
  cfg.dense1_units = 5;
  cfg.dropout_rho = 0.35;
  cfg.seed = seed;
  return cfg;
}

bool params_equal(const NetworkParams& a, const NetworkParams& b) {
  bool equal = a.config == b.config;
  for_each_tensor(
      [&](const auto& x, const auto& y) {
        equal = equal && x.rows() == y.rows() && x.cols() == y.cols() &&
                (x.array() == y.array()).all();
      },
      a, b);
  return equal;
}

}  // namespace

TEST_SUITE("serialize") {

TEST_CASE("serialize and parse are exact inverses") {
  const NetworkParams params = init_params(small_config(77));
  const std::vector<std::uint8_t> bytes = serialize_model(params);

  // magic and version
  REQUIRE(bytes.size() > 9);
  CHECK(bytes[0] == 'N');
  CHECK(bytes[1] == 'C');
  CHECK(bytes[2] == 'M');
  CHECK(bytes[3] == 'P');
  CHECK(bytes[4] == 1);

  const LoadedModel loaded = parse_model(bytes);
  CHECK(params_equal(loaded.params, params));
  CHECK(loaded.params.config.dropout_rho == 0.35);
  CHECK(loaded.params.config.seed == 77);

  // reserializing the parse gives the identical file
  CHECK(serialize_model(loaded.params) == bytes);
}

TEST_CASE("checksum is the crc of everything before the trailer") {
  const NetworkParams params = init_params(small_config(78));
  const std::vector<std::uint8_t> bytes = serialize_model(params);

  const std::uint32_t body_crc =
      crc32(std::span<const std::uint8_t>(bytes).first(bytes.size() - 4));
  CHECK(model_checksum(params) == body_crc);
  CHECK(parse_model(bytes).checksum == body_crc);

  // trailer stored little endian
  const std::size_t n = bytes.size();
  const std::uint32_t trailer = static_cast<std::uint32_t>(bytes[n - 4]) |
                                (static_cast<std::uint32_t>(bytes[n - 3]) << 8) |
                                (static_cast<std::uint32_t>(bytes[n - 2]) << 16) |
                                (static_cast<std::uint32_t>(bytes[n - 1]) << 24);
  CHECK(trailer == body_crc);
}

TEST_CASE("serialization is deterministic in config and seed") {
  CHECK(serialize_model(init_params(small_config(5))) ==
        serialize_model(init_params(small_config(5))));
  CHECK(serialize_model(init_params(small_config(5))) !=
        serialize_model(init_params(small_config(6))));
}

TEST_CASE("file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "ncomp_serialize_rt.ncm";
  const NetworkParams params = init_params(small_config(79));
  save_model(params, path.string());
  const LoadedModel loaded = load_model(path.string());
  CHECK(params_equal(loaded.params, params));
  CHECK(loaded.checksum == model_checksum(params));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_model("/nonexistent/dir/model.ncm"), Error);
}

TEST_CASE("targeted corruption") {
  const NetworkParams params = init_params(small_config(80));
  const std::vector<std::uint8_t> good = serialize_model(params);

  SUBCASE("broken magic") {
    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(parse_model(bad), FormatError);
  }

  SUBCASE("unsupported version") {
    auto bad = good;
    bad[4] = 2;
    CHECK_THROWS_AS(parse_model(bad), FormatError);
  }

  SUBCASE("weight bytes no longer match the trailer") {
    auto bad = good;
    bad[bad.size() / 2] ^= 0x40;
    CHECK_THROWS_AS(parse_model(bad), ChecksumError);
  }

  SUBCASE("stale trailer") {
    auto bad = good;
    bad.back() ^= 0x01;
    CHECK_THROWS_AS(parse_model(bad), ChecksumError);
  }

  SUBCASE("truncation") {
    auto bad = good;
    bad.resize(bad.size() - 9);
    CHECK_THROWS_AS(parse_model(bad), FormatError);
    CHECK_THROWS_AS(parse_model(std::vector<std::uint8_t>{'N', 'C'}), FormatError);
    CHECK_THROWS_AS(parse_model(std::vector<std::uint8_t>{}), FormatError);
  }
}

TEST_CASE("no single byte flip parses cleanly") {
  const NetworkParams params = init_params(small_config(81));
  const std::vector<std::uint8_t> good = serialize_model(params);
  REQUIRE_NOTHROW(parse_model(good));

  Rng rng(82);
  for (int trial = 0; trial < 60; ++trial) {
    auto bad = good;
    const std::size_t pos = rng.next_below(bad.size());
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << rng.next_below(8));
    bad[pos] ^= bit;
    // every flip must surface as some structured error, never a silent parse
    CHECK_THROWS_AS(parse_model(bad), Error);
  }
}

}  // TEST_SUITE
