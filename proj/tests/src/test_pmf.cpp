#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ncomp/pmf.hpp"
#include "ncomp/rng.hpp"

using namespace ncomp;

TEST_SUITE("pmf") {

TEST_CASE("uniform quantization costs exactly eight bits per symbol") {
  const Pmf uniform = Pmf::Constant(kAlphabetSize, 1.0 / kAlphabetSize);
  const QuantizedPmf q = quantize_pmf(uniform);
  // floor((1/256) * 65280) = 255 for every symbol
  CHECK(q.total() == 65280);
  for (int s = 0; s < kAlphabetSize; ++s) {
    CHECK(q.freq(s) == 255);
    CHECK(q.cum(s) == 255u * static_cast<std::uint32_t>(s));
  }
  CHECK(std::log2(static_cast<double>(q.total()) / q.freq(0)) == 8.0);
}

TEST_CASE("a certain symbol still leaves every byte codable") {
  Pmf p = Pmf::Zero(kAlphabetSize);
  p[65] = 1.0;
  const QuantizedPmf q = quantize_pmf(p);
  CHECK(q.freq(65) == 65280);
  for (int s = 0; s < kAlphabetSize; ++s) {
    if (s != 65) CHECK(q.freq(s) == 1);
  }
  CHECK(q.total() == 65280 + 255);
  CHECK(q.total() <= kMaxFreqTotal);
}

TEST_CASE("random pmfs satisfy the coder budget") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Pmf p(kAlphabetSize);
    double sum = 0.0;
    for (int s = 0; s < kAlphabetSize; ++s) {
      p[s] = rng.next_unit() + 1e-9;
      sum += p[s];
    }
    p /= sum;
    const QuantizedPmf q = quantize_pmf(p);
    std::uint64_t total = 0;
    for (int s = 0; s < kAlphabetSize; ++s) {
      CHECK(q.freq(s) >= 1);
      total += q.freq(s);
    }
    CHECK(total == q.total());
    CHECK(total <= kMaxFreqTotal);
    CHECK(q.cumulative()[0] == 0);
    CHECK(q.cumulative()[kAlphabetSize] == q.total());
  }
}

TEST_CASE("find agrees with a linear scan") {
  Rng rng(22);
  std::vector<std::uint32_t> counts(kAlphabetSize);
  for (auto& c : counts) c = 1 + static_cast<std::uint32_t>(rng.next_below(200));
  const QuantizedPmf q = QuantizedPmf::from_counts(counts);

  auto linear = [&](std::uint32_t target) {
    for (int s = 0; s < kAlphabetSize; ++s) {
      if (target < q.cum(s) + q.freq(s)) return s;
    }
    return kAlphabetSize - 1;
  };

  for (int i = 0; i < 2000; ++i) {
    const auto target = static_cast<std::uint32_t>(rng.next_below(q.total()));
    CHECK(q.find(target) == linear(target));
  }
  // slot boundaries
  for (int s = 0; s < kAlphabetSize; ++s) {
    CHECK(q.find(q.cum(s)) == s);
    CHECK(q.find(q.cum(s) + q.freq(s) - 1) == s);
  }
}

TEST_CASE("from_counts validates its input") {
  std::vector<std::uint32_t> counts(kAlphabetSize, 1);
  CHECK_NOTHROW(QuantizedPmf::from_counts(counts));

  counts[3] = 0;
  CHECK_THROWS_AS(QuantizedPmf::from_counts(counts), std::invalid_argument);

  counts.assign(kAlphabetSize, 257);  // sums to 65792 > 2^16
  CHECK_THROWS_AS(QuantizedPmf::from_counts(counts), std::invalid_argument);

  counts.assign(100, 1);
  CHECK_THROWS_AS(QuantizedPmf::from_counts(counts), std::invalid_argument);
}

TEST_CASE("quantize_pmf validates its input") {
  CHECK_THROWS_AS(quantize_pmf(Pmf::Constant(10, 0.1)), std::invalid_argument);

  Pmf p = Pmf::Constant(kAlphabetSize, 1.0 / kAlphabetSize);
  p[0] = -p[0];
  CHECK_THROWS_AS(quantize_pmf(p), std::invalid_argument);

  p = Pmf::Constant(kAlphabetSize, 1.0 / kAlphabetSize);
  p[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(quantize_pmf(p), std::invalid_argument);

  p = Pmf::Constant(kAlphabetSize, 1.1 / kAlphabetSize);  // sums to 1.1
  CHECK_THROWS_AS(quantize_pmf(p), std::invalid_argument);
}

TEST_CASE("equality is structural") {
  std::vector<std::uint32_t> counts(kAlphabetSize, 2);
  const QuantizedPmf a = QuantizedPmf::from_counts(counts);
  const QuantizedPmf b = QuantizedPmf::from_counts(counts);
  counts[0] = 3;
  const QuantizedPmf c = QuantizedPmf::from_counts(counts);
  CHECK(a == b);
  CHECK(a != c);
}

}  // TEST_SUITE
