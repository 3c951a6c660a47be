#include <doctest.h>

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ncomp/dataset.hpp"

using namespace ncomp;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) {
  return {s.begin(), s.end()};
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("five bytes, window two") {
  const auto text = bytes_of("abcde");
  std::vector<std::uint8_t> tags = {1, 2, 3, 4, 5};

  const auto samples = make_windows(text, tags, 2);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].context == bytes_of("ab"));
  CHECK(samples[0].tags == std::vector<std::uint8_t>{1, 2});
  CHECK(samples[0].target == 'c');
  CHECK(samples[1].context == bytes_of("bc"));
  CHECK(samples[1].target == 'd');
  CHECK(samples[2].context == bytes_of("cd"));
  CHECK(samples[2].target == 'e');

  const auto strided = make_windows(text, tags, 2, 2);
  REQUIRE(strided.size() == 2);
  CHECK(strided[0].context == bytes_of("ab"));
  CHECK(strided[0].target == 'c');
  CHECK(strided[1].context == bytes_of("cd"));
  CHECK(strided[1].tags == std::vector<std::uint8_t>{3, 4});
  CHECK(strided[1].target == 'e');
}

TEST_CASE("window_count closed form") {
  CHECK(window_count(0, 40, 1) == 0);
  CHECK(window_count(40, 40, 1) == 0);   // no byte left to predict
  CHECK(window_count(41, 40, 1) == 1);
  CHECK(window_count(167518, 40, 1) == 167478);
  CHECK(window_count(100, 10, 3) == 30);
}

TEST_CASE("window_count matches enumeration everywhere") {
  for (std::size_t len = 0; len <= 40; ++len) {
    for (std::size_t window = 1; window <= 6; ++window) {
      for (std::size_t stride = 1; stride <= 4; ++stride) {
        std::size_t expect = 0;
        for (std::size_t i = 0; i * stride + window < len; ++i) ++expect;
        CHECK(window_count(len, window, stride) == expect);

        std::vector<std::uint8_t> text(len), tags(len);
        for (std::size_t i = 0; i < len; ++i) text[i] = static_cast<std::uint8_t>(i);
        if (expect > 0) {
          const auto samples = make_windows(text, tags, window, stride);
          REQUIRE(samples.size() == expect);
          for (std::size_t i = 0; i < samples.size(); ++i) {
            CHECK(samples[i].context.front() == static_cast<std::uint8_t>(i * stride));
            CHECK(samples[i].target == static_cast<std::uint8_t>(i * stride + window));
          }
        }
      }
    }
  }
}

TEST_CASE("degenerate arguments are rejected") {
  const auto text = bytes_of("abcdef");
  std::vector<std::uint8_t> tags(text.size());
  CHECK_THROWS_AS(make_windows(text, tags, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_windows(text, tags, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(window_count(10, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(window_count(10, 2, 0), std::invalid_argument);

  std::vector<std::uint8_t> short_tags(text.size() - 1);
  CHECK_THROWS_AS(make_windows(text, short_tags, 2), std::invalid_argument);

  // too short for even one sample
  CHECK_THROWS_AS(make_windows(bytes_of("ab"), std::vector<std::uint8_t>(2), 2),
                  std::invalid_argument);
}

}  // TEST_SUITE
