#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>
#include <vector>

#include "ncomp/bitio.hpp"
#include "ncomp/model.hpp"
#include "ncomp/pmf.hpp"
#include "ncomp/range_coder.hpp"
#include "ncomp/rng.hpp"
#include "ncomp/tagging.hpp"
#include "ncomp/training.hpp"

using namespace ncomp;

namespace {

NetworkParams default_params() {
  ModelConfig cfg;
  return init_params(cfg);
}

WindowSample random_window(std::size_t window, std::uint64_t seed) {
  Rng rng(seed);
  WindowSample s;
  for (std::size_t i = 0; i < window; ++i) {
    s.context.push_back(static_cast<std::uint8_t>(rng.next_below(256)));
    s.tags.push_back(static_cast<std::uint8_t>(rng.next_below(kTagAlphabetSize)));
  }
  s.target = static_cast<std::uint8_t>(rng.next_below(256));
  return s;
}

}  // namespace

static void BM_GruStep(benchmark::State& state) {
  const NetworkParams params = default_params();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(kAlphabetSize);
  x(65) = 1.0;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(params.char_gru.units());
  for (auto _ : state) {
    h = gru_step(params.char_gru, x, h);
    benchmark::DoNotOptimize(h.data());
  }
}
BENCHMARK(BM_GruStep);

static void BM_ForwardInfer(benchmark::State& state) {
  const NetworkParams params = default_params();
  const WindowSample s = random_window(params.config.window, 11);
  for (auto _ : state) {
    const Pmf p = forward_infer(params, s.context, s.tags);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_ForwardInfer);

static void BM_TrainStep(benchmark::State& state) {
  NetworkParams params = default_params();
  const WindowSample s = random_window(params.config.window, 12);
  Gradients grads = zeros_like(params);
  RmspropState rms = zeros_like(params);
  TrainingConfig cfg;
  Rng rng(13);
  ForwardTrace trace;
  for (auto _ : state) {
    forward_train(params, s.context, s.tags, PosMode::enabled, rng, trace);
    grads = backward(params, trace, s.target);
    rmsprop_step(params, grads, rms, cfg);
  }
}
BENCHMARK(BM_TrainStep);

static void BM_QuantizePmf(benchmark::State& state) {
  Rng rng(14);
  Pmf p(kAlphabetSize);
  for (int i = 0; i < kAlphabetSize; ++i) p(i) = 1e-6 + rng.next_unit();
  p /= p.sum();
  for (auto _ : state) {
    const QuantizedPmf q = quantize_pmf(p);
    benchmark::DoNotOptimize(q.total());
  }
}
BENCHMARK(BM_QuantizePmf);

static void BM_RangeEncode(benchmark::State& state) {
  std::vector<std::uint32_t> counts(kAlphabetSize, 1);
  for (int i = 0; i < 32; ++i) counts[i] = 1000 - 30 * i;
  const QuantizedPmf pmf = QuantizedPmf::from_counts(counts);
  Rng rng(15);
  std::vector<std::uint8_t> symbols(4096);
  for (auto& s : symbols)
    s = static_cast<std::uint8_t>(pmf.find(static_cast<std::uint32_t>(rng.next_below(pmf.total()))));

  for (auto _ : state) {
    BitWriter w;
    RangeEncoder enc(w);
    for (const std::uint8_t s : symbols) enc.encode(pmf, s);
    enc.finish();
    benchmark::DoNotOptimize(w.bit_count());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 4096);
}
BENCHMARK(BM_RangeEncode);

static void BM_TagPrefix(benchmark::State& state) {
  const std::string chunk =
      "the quick brown fox jumps over the lazy dog while seven kings were "
      "walking quickly toward the station with their oldest friends ";
  std::string text;
  while (text.size() < 1 << 16) text += chunk;
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  for (auto _ : state) {
    const auto tags = tag_prefix(LexiconTagger::english(), bytes);
    benchmark::DoNotOptimize(tags.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_TagPrefix);

BENCHMARK_MAIN();
