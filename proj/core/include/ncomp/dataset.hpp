#ifndef NCOMP_DATASET_HPP
#define NCOMP_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ncomp {

// One training example: a fixed-length context with aligned tag ids and the
// byte that immediately follows it.
struct WindowSample {
  std::vector<std::uint8_t> context;
  std::vector<std::uint8_t> tags;
  std::uint8_t target = 0;
};

// Number of windows a text of the given length yields.
std::size_t window_count(std::size_t text_len, std::size_t window, std::size_t stride);

// Slices text into overlapping windows: sample i covers
// text[i*stride, i*stride + window) and targets text[i*stride + window].
// tags must align index-for-index with text.
std::vector<WindowSample> make_windows(std::span<const std::uint8_t> text,
                                       std::span<const std::uint8_t> tags, std::size_t window,
                                       std::size_t stride = 1);

}  // namespace ncomp

#endif  // NCOMP_DATASET_HPP
