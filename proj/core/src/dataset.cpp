#include "ncomp/dataset.hpp"

#include <stdexcept>
#include <string>

namespace ncomp {

std::size_t window_count(std::size_t text_len, std::size_t window, std::size_t stride) {
  if (window < 1 || stride < 1) {
    throw std::invalid_argument("window_count: window and stride must be >= 1");
  }
  if (text_len < window + 1) return 0;
  return (text_len - window - 1) / stride + 1;
}

std::vector<WindowSample> make_windows(std::span<const std::uint8_t> text,
                                       std::span<const std::uint8_t> tags, std::size_t window,
                                       std::size_t stride) {
  if (text.size() < window + 1) {
    throw std::invalid_argument("make_windows: need at least " + std::to_string(window + 1) +
                                " bytes, got " + std::to_string(text.size()));
  }
  if (tags.size() != text.size()) {
    throw std::invalid_argument("make_windows: tag sequence length " +
                                std::to_string(tags.size()) + " != text length " +
                                std::to_string(text.size()));
  }
  const std::size_t count = window_count(text.size(), window, stride);
  std::vector<WindowSample> samples;
  samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = i * stride;
    WindowSample s;
    s.context.assign(text.begin() + off, text.begin() + off + window);
    s.tags.assign(tags.begin() + off, tags.begin() + off + window);
    s.target = text[off + window];
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace ncomp
